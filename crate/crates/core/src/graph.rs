//! Digraphs and the gossip edge-activation model.
//!
//! Nodes are labelled `1..=n`. An edge `(j, i)` means node `j` transmits to
//! node `i`; at every time step exactly one edge is activated, drawn
//! independently from a fixed distribution over the edge set.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("a digraph needs at least 2 nodes, got {0}")]
    InvalidSize(usize),
    #[error("node label {label} out of range 1..={n}")]
    NodeOutOfRange { label: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("digraph has no edges")]
    NoEdges,
    #[error("expected {expected} activation weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("activation probability {p} of edge ({from}, {to}) is not in (0, 1)")]
    WeightOutOfRange { from: usize, to: usize, p: f64 },
    #[error("activation probabilities sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("bad graph spec `{0}`")]
    BadSpec(String),
    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("reading edge list: {0}")]
    Io(String),
}

/// A directed edge `(from, to)`: `from` sends, `to` receives and updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

impl Edge {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to }
    }

    pub fn reversed(self) -> Self {
        Self { from: self.to, to: self.from }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.from, self.to)
    }
}

/// A simple digraph on nodes `1..=n`: no self-loops, no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Digraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::InvalidSize(n));
        }
        if edges.is_empty() {
            return Err(GraphError::NoEdges);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            for label in [e.from, e.to] {
                if label == 0 || label > n {
                    return Err(GraphError::NodeOutOfRange { label, n });
                }
            }
            if e.from == e.to {
                return Err(GraphError::SelfLoop(e.from));
            }
            if !seen.insert(*e) {
                return Err(GraphError::DuplicateEdge(e.from, e.to));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    /// With no self-loops or duplicates, completeness is just the edge count.
    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1)
    }

    /// True iff some node can be reached from every other node along directed paths.
    pub fn has_globally_reachable_node(&self) -> bool {
        self.globally_reachable_node().is_some()
    }

    /// Smallest label of a globally reachable node, if any.
    pub fn globally_reachable_node(&self) -> Option<usize> {
        // reverse adjacency: who sends to v
        let mut incoming = vec![Vec::new(); self.n + 1];
        for e in &self.edges {
            incoming[e.to].push(e.from);
        }
        (1..=self.n).find(|&root| {
            let mut visited = vec![false; self.n + 1];
            visited[root] = true;
            let mut reached = 1;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &u in &incoming[v] {
                    if !visited[u] {
                        visited[u] = true;
                        reached += 1;
                        queue.push_back(u);
                    }
                }
            }
            reached == self.n
        })
    }
}

/// The complete digraph on `n` nodes: all `n(n-1)` ordered pairs.
pub fn complete_digraph(n: usize) -> Result<Digraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    let edges = (1..=n)
        .flat_map(|j| (1..=n).filter(move |&i| i != j).map(move |i| Edge::new(j, i)))
        .collect();
    Digraph::new(n, edges)
}

/// Directed path `1 -> 2 -> ... -> n`.
pub fn path_digraph(n: usize) -> Result<Digraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    Digraph::new(n, (1..n).map(|j| Edge::new(j, j + 1)).collect())
}

/// Directed cycle `1 -> 2 -> ... -> n -> 1`.
pub fn ring_digraph(n: usize) -> Result<Digraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    Digraph::new(n, (1..=n).map(|j| Edge::new(j, j % n + 1)).collect())
}

/// Per-edge activation probabilities, aligned with [`Digraph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationModel {
    edges: Vec<Edge>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    uniform: bool,
}

impl ActivationModel {
    pub fn new(g: &Digraph, weights: Vec<f64>) -> Result<Self, GraphError> {
        if weights.len() != g.edge_count() {
            return Err(GraphError::WeightCount { expected: g.edge_count(), got: weights.len() });
        }
        for (e, &p) in g.edges().iter().zip(&weights) {
            if !(p > 0.0 && p < 1.0) {
                return Err(GraphError::WeightOutOfRange { from: e.from, to: e.to, p });
            }
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &p in &weights {
            acc += p;
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > 1e-12 {
            return Err(GraphError::WeightSum(acc));
        }
        let uniform = weights.iter().all(|&p| p == weights[0]);
        Ok(Self { edges: g.edges().to_vec(), weights, cumulative, uniform })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_of(&self, e: Edge) -> Option<f64> {
        self.edges.iter().position(|&x| x == e).map(|k| self.weights[k])
    }

    /// True when every edge carries the same probability.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Draws one edge by inverse CDF over the cumulative weight table.
    pub fn sample_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Edge {
        let total = *self.cumulative.last().expect("validated non-empty");
        let u: f64 = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.edges[k.min(self.edges.len() - 1)]
    }
}

/// Uniform activation over the edge set.
///
/// Fails only for a single-edge digraph, whose lone probability would be 1.
pub fn uniform_activation(g: &Digraph) -> Result<ActivationModel, GraphError> {
    let p = 1.0 / g.edge_count() as f64;
    ActivationModel::new(g, vec![p; g.edge_count()])
}

pub fn sample_edge<R: Rng + ?Sized>(model: &ActivationModel, rng: &mut R) -> Edge {
    model.sample_edge(rng)
}

/// Parsed topology plus activation model.
#[derive(Debug, Clone)]
pub struct Network {
    pub graph: Digraph,
    pub activation: ActivationModel,
}

impl Network {
    pub fn uniform(graph: Digraph) -> Result<Self, GraphError> {
        let activation = uniform_activation(&graph)?;
        Ok(Self { graph, activation })
    }

    /// Resolves a graph spec: `complete:<n>`, `path:<n>`, `ring:<n>`, or a path
    /// to an edge-list file.
    pub fn from_spec(spec: &str) -> Result<Self, GraphError> {
        if let Some((kind, arg)) = spec.split_once(':') {
            let builder: Option<fn(usize) -> Result<Digraph, GraphError>> = match kind {
                "complete" => Some(complete_digraph),
                "path" => Some(path_digraph),
                "ring" => Some(ring_digraph),
                _ => None,
            };
            if let Some(build) = builder {
                let n = arg.trim().parse().map_err(|_| GraphError::BadSpec(spec.to_string()))?;
                return Self::uniform(build(n)?);
            }
        }
        let path = Path::new(spec);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io(e.to_string()))?;
            return parse_edge_list(&text);
        }
        Err(GraphError::BadSpec(spec.to_string()))
    }
}

/// Parses the edge-list text format:
///
/// ```text
/// n 3
/// 1 2 0.5
/// 2 3 0.5
/// ```
///
/// Probabilities are optional but must be given for all edges or none;
/// uniform activation is assumed when absent. `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Network, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "empty input".into() })?;
    let mut head = header.split_whitespace();
    let n = match (head.next(), head.next(), head.next()) {
        (Some("n"), Some(count), None) => count
            .parse::<usize>()
            .map_err(|_| GraphError::Parse { line: hline, msg: format!("bad node count `{count}`") })?,
        _ => return Err(GraphError::Parse { line: hline, msg: "expected `n <count>`".into() }),
    };

    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for (line, body) in lines {
        let fields: Vec<&str> = body.split_whitespace().collect();
        let bad = |msg: String| GraphError::Parse { line, msg };
        if fields.len() != 2 && fields.len() != 3 {
            return Err(bad(format!("expected `j i [p]`, got `{body}`")));
        }
        let j = fields[0].parse().map_err(|_| bad(format!("bad node `{}`", fields[0])))?;
        let i = fields[1].parse().map_err(|_| bad(format!("bad node `{}`", fields[1])))?;
        edges.push(Edge::new(j, i));
        if let Some(p) = fields.get(2) {
            weights.push(p.parse::<f64>().map_err(|_| bad(format!("bad probability `{p}`")))?);
        }
        if !weights.is_empty() && weights.len() != edges.len() {
            return Err(bad("probabilities must be given for every edge or none".into()));
        }
    }
    let graph = Digraph::new(n, edges)?;
    if weights.is_empty() {
        Network::uniform(graph)
    } else {
        let activation = ActivationModel::new(&graph, weights)?;
        Ok(Network { graph, activation })
    }
}
