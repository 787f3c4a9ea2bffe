//! Quantized consensus: integer states, one receiver update per activated edge.
//!
//! When edge `(j, i)` fires, the sender `j` is unchanged and the receiver `i`
//! moves into the half-open interval between its value and the sender's:
//! equal values stay put, a lower receiver picks a value in `(x_i, x_j]`, a
//! higher receiver picks a value in `[x_j, x_i)`. Where the new value lands
//! inside that interval is a [`QcPolicy`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ActivationModel, Digraph, Edge};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QcError {
    #[error("policy chose {chosen} for receiver {receiver}, outside the allowed interval {interval}")]
    PolicyViolation { receiver: usize, chosen: i64, interval: String },
    #[error("edge {0} references a node outside the state vector")]
    EdgeOutOfRange(Edge),
    #[error("initial state has {got} entries, graph has {expected} nodes")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no consensus after {steps} steps")]
    NotConverged { steps: u64 },
    #[error("max_steps must be positive")]
    ZeroStepBudget,
    #[error("two-level state needs 1 <= z <= n-1, got n={n}, z={z}")]
    SplitOutOfRange { n: usize, z: usize },
}

/// Selects the receiver's new value given `(x_i, x_j)` with `x_i != x_j`.
pub type Selector = Arc<dyn Fn(i64, i64) -> i64 + Send + Sync>;

/// How the receiver resolves the open update interval.
#[derive(Clone, Default)]
pub enum QcPolicy {
    /// Take the sender's value.
    #[default]
    Adopt,
    /// Move one unit toward the sender's value.
    Step,
    /// Caller-supplied choice; checked against the interval on every use.
    Custom(Selector),
}

impl fmt::Debug for QcPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QcPolicy::Adopt => f.write_str("Adopt"),
            QcPolicy::Step => f.write_str("Step"),
            QcPolicy::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl QcPolicy {
    fn choose(&self, receiver: i64, sender: i64) -> i64 {
        match self {
            QcPolicy::Adopt => sender,
            QcPolicy::Step => receiver + (sender - receiver).signum(),
            QcPolicy::Custom(select) => select(receiver, sender),
        }
    }
}

/// Serializable policy name for configs (custom selectors are code-only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[default]
    Adopt,
    Step,
}

impl From<PolicyKind> for QcPolicy {
    fn from(kind: PolicyKind) -> Self {
        match kind {
            PolicyKind::Adopt => QcPolicy::Adopt,
            PolicyKind::Step => QcPolicy::Step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QcState {
    x: Vec<i64>,
}

impl QcState {
    pub fn new(x: Vec<i64>) -> Self {
        Self { x }
    }

    pub fn values(&self) -> &[i64] {
        &self.x
    }

    pub fn into_values(self) -> Vec<i64> {
        self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_consensus(&self) -> bool {
        self.x.windows(2).all(|w| w[0] == w[1])
    }

    pub fn interval(&self) -> Interval {
        interval_stats(&self.x)
    }

    /// In-place update for edge `(j, i)`.
    pub fn apply(&mut self, edge: Edge, policy: &QcPolicy) -> Result<(), QcError> {
        let n = self.x.len();
        if edge.from == 0 || edge.to == 0 || edge.from > n || edge.to > n {
            return Err(QcError::EdgeOutOfRange(edge));
        }
        let xj = self.x[edge.from - 1];
        let xi = self.x[edge.to - 1];
        if xi == xj {
            return Ok(());
        }
        let chosen = policy.choose(xi, xj);
        let ok = if xi < xj { chosen > xi && chosen <= xj } else { chosen >= xj && chosen < xi };
        if !ok {
            let interval = if xi < xj { format!("({xi}, {xj}]") } else { format!("[{xj}, {xi})") };
            return Err(QcError::PolicyViolation { receiver: edge.to, chosen, interval });
        }
        self.x[edge.to - 1] = chosen;
        Ok(())
    }
}

/// Pure transition: the state after activating `edge`.
pub fn qc_step(state: &QcState, edge: Edge, policy: &QcPolicy) -> Result<QcState, QcError> {
    let mut next = state.clone();
    next.apply(edge, policy)?;
    Ok(next)
}

pub fn is_consensus(state: &QcState) -> bool {
    state.is_consensus()
}

/// Smallest interval `[min, max]` containing all states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub min: i64,
    pub max: i64,
    pub length: i64,
}

pub fn interval_stats(x: &[i64]) -> Interval {
    let min = x.iter().copied().min().unwrap_or(0);
    let max = x.iter().copied().max().unwrap_or(0);
    Interval { min, max, length: max - min }
}

/// `z` leading ones followed by `n - z` zeros.
pub fn two_level_state(n: usize, z: usize) -> Result<QcState, QcError> {
    if z == 0 || z >= n {
        return Err(QcError::SplitOutOfRange { n, z });
    }
    Ok(QcState::new((0..n).map(|k| i64::from(k < z)).collect()))
}

/// Generous cap on trajectory length: `10^4 * n^2 * (M - m + 1)`.
pub fn default_max_steps(x0: &[i64]) -> u64 {
    let n = x0.len() as u64;
    let spread = interval_stats(x0).length.unsigned_abs();
    10_000u64.saturating_mul(n * n).saturating_mul(spread + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QcRun {
    pub final_state: QcState,
    /// First step at which the state is a consensus.
    pub steps: u64,
}

/// Runs until consensus with a caller-provided random stream.
pub fn run_qc_with<R: Rng + ?Sized>(
    g: &Digraph,
    model: &ActivationModel,
    x0: &[i64],
    policy: &QcPolicy,
    rng: &mut R,
    max_steps: u64,
) -> Result<QcRun, QcError> {
    if x0.len() != g.node_count() {
        return Err(QcError::DimensionMismatch { expected: g.node_count(), got: x0.len() });
    }
    if max_steps == 0 {
        return Err(QcError::ZeroStepBudget);
    }
    let mut state = QcState::new(x0.to_vec());
    let mut k = 0;
    while !state.is_consensus() {
        if k == max_steps {
            return Err(QcError::NotConverged { steps: k });
        }
        state.apply(model.sample_edge(rng), policy)?;
        k += 1;
    }
    Ok(QcRun { final_state: state, steps: k })
}

/// Runs until consensus from a fixed seed.
///
/// Graphs without a globally reachable node are simulated anyway (with a
/// warning); they are expected to end in a non-convergence error.
pub fn run_qc(
    g: &Digraph,
    model: &ActivationModel,
    x0: &[i64],
    policy: &QcPolicy,
    seed: u64,
    max_steps: u64,
) -> Result<QcRun, QcError> {
    if !g.has_globally_reachable_node() {
        log::warn!("digraph has no globally reachable node; consensus is not guaranteed");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_qc_with(g, model, x0, policy, &mut rng, max_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_digraph, uniform_activation, Digraph};

    fn st(v: &[i64]) -> QcState {
        QcState::new(v.to_vec())
    }

    #[test]
    fn equal_values_are_untouched() {
        assert_eq!(qc_step(&st(&[1, 1]), Edge::new(1, 2), &QcPolicy::Adopt).unwrap(), st(&[1, 1]));
    }

    #[test]
    fn higher_receiver_moves_down() {
        // node 1 sends to node 2; x_2 = 1 > x_1 = 0, only choice is 0
        for policy in [QcPolicy::Adopt, QcPolicy::Step] {
            assert_eq!(qc_step(&st(&[0, 1]), Edge::new(1, 2), &policy).unwrap(), st(&[0, 0]));
        }
    }

    #[test]
    fn adopt_and_step_policies() {
        assert_eq!(qc_step(&st(&[0, 5]), Edge::new(2, 1), &QcPolicy::Adopt).unwrap(), st(&[5, 5]));
        assert_eq!(qc_step(&st(&[0, 5]), Edge::new(2, 1), &QcPolicy::Step).unwrap(), st(&[1, 5]));
        assert_eq!(qc_step(&st(&[0, 5]), Edge::new(1, 2), &QcPolicy::Step).unwrap(), st(&[0, 4]));
    }

    #[test]
    fn custom_policy_is_checked() {
        let midpoint = QcPolicy::Custom(Arc::new(|xi, xj| xi + (xj - xi) / 2));
        assert_eq!(qc_step(&st(&[0, 6]), Edge::new(2, 1), &midpoint).unwrap(), st(&[3, 6]));
        // gap of one: midpoint rounds back onto x_i, which is outside (x_i, x_j]
        let err = qc_step(&st(&[0, 1]), Edge::new(2, 1), &midpoint).unwrap_err();
        assert!(matches!(err, QcError::PolicyViolation { receiver: 1, chosen: 0, .. }));
        let overshoot = QcPolicy::Custom(Arc::new(|_, xj| xj + 1));
        assert!(qc_step(&st(&[0, 3]), Edge::new(2, 1), &overshoot).is_err());
    }

    #[test]
    fn edge_out_of_range() {
        assert_eq!(
            qc_step(&st(&[0, 1]), Edge::new(1, 3), &QcPolicy::Adopt),
            Err(QcError::EdgeOutOfRange(Edge::new(1, 3)))
        );
    }

    #[test]
    fn consensus_predicate() {
        assert!(st(&[3, 3, 3]).is_consensus());
        assert!(!st(&[1, 1, 0]).is_consensus());
        assert!(st(&[0; 7]).is_consensus());
    }

    #[test]
    fn interval_examples() {
        assert_eq!(interval_stats(&[1, 0, 1]), Interval { min: 0, max: 1, length: 1 });
        assert_eq!(interval_stats(&[5, 5]), Interval { min: 5, max: 5, length: 0 });
        assert_eq!(interval_stats(&[-2, 3, 0]), Interval { min: -2, max: 3, length: 5 });
    }

    #[test]
    fn two_level_states() {
        assert_eq!(two_level_state(3, 1).unwrap(), st(&[1, 0, 0]));
        assert_eq!(two_level_state(4, 3).unwrap(), st(&[1, 1, 1, 0]));
        assert_eq!(two_level_state(2, 1).unwrap(), st(&[1, 0]));
        assert!(two_level_state(3, 0).is_err());
        assert!(two_level_state(3, 3).is_err());
    }

    #[test]
    fn two_nodes_resolve_in_one_step() {
        let g = complete_digraph(2).unwrap();
        let m = uniform_activation(&g).unwrap();
        for seed in 0..200 {
            let run = run_qc(&g, &m, &[1, 0], &QcPolicy::Adopt, seed, 100).unwrap();
            assert_eq!(run.steps, 1);
        }
    }

    #[test]
    fn constant_start_takes_zero_steps() {
        let g = complete_digraph(4).unwrap();
        let m = uniform_activation(&g).unwrap();
        let run = run_qc(&g, &m, &[7, 7, 7, 7], &QcPolicy::Adopt, 1, 10).unwrap();
        assert_eq!(run.steps, 0);
    }

    #[test]
    fn disconnected_graph_fails_to_converge() {
        let g = Digraph::new(
            4,
            vec![Edge::new(1, 2), Edge::new(2, 1), Edge::new(3, 4), Edge::new(4, 3)],
        )
        .unwrap();
        let m = uniform_activation(&g).unwrap();
        let err = run_qc(&g, &m, &[0, 0, 1, 1], &QcPolicy::Adopt, 3, 500).unwrap_err();
        assert_eq!(err, QcError::NotConverged { steps: 500 });
    }

    #[test]
    fn run_rejects_bad_setup() {
        let g = complete_digraph(3).unwrap();
        let m = uniform_activation(&g).unwrap();
        assert!(matches!(
            run_qc(&g, &m, &[1, 0], &QcPolicy::Adopt, 0, 10),
            Err(QcError::DimensionMismatch { .. })
        ));
        assert_eq!(run_qc(&g, &m, &[1, 0, 0], &QcPolicy::Adopt, 0, 0), Err(QcError::ZeroStepBudget));
    }

    #[test]
    fn default_budget_formula() {
        assert_eq!(default_max_steps(&[1, 0, 0]), 10_000 * 9 * 2);
        assert_eq!(default_max_steps(&[4, 4]), 10_000 * 4);
    }
}
