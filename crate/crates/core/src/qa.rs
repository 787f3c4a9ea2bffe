//! Quantized averaging with one-bit surpluses.
//!
//! Each node carries an integer state `x_i` and a surplus `s_i ∈ {0, 1}`.
//! When edge `(j, i)` fires, `j` ships `(x_j, s_j)` to `i` and clears its own
//! surplus; `i` then either updates, or (when nothing can be done) returns
//! `s_j` over the reverse edge, which leaves both nodes as they were. The
//! reverse hop is why the protocol is only defined on complete digraphs.
//!
//! `(x + s)ᵀ1` is conserved exactly, surpluses stay binary, and the state hull
//! `[min x, max x]` can only shrink.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ActivationModel, Digraph, Edge};
use crate::lyapunov::{LyapunovError, LyapunovState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QaError {
    #[error("quantized averaging requires a complete digraph (the surplus send-back uses the reverse edge)")]
    UnsupportedTopology,
    #[error("edge {0} references a node outside the state vector")]
    EdgeOutOfRange(Edge),
    #[error("initial state has {got} entries, graph has {expected} nodes")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no average consensus after {steps} steps")]
    NotConverged { steps: u64 },
    #[error("max_steps must be positive")]
    ZeroStepBudget,
    #[error(transparent)]
    Tracker(#[from] LyapunovError),
    #[error("step {step}: {msg}")]
    Observer { step: u64, msg: String },
}

/// Which update case applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QaRule {
    /// Equal states, both surpluses set: surplus returned, nothing changes.
    R1i,
    /// Equal states otherwise: receiver absorbs the sender's surplus.
    R1ii,
    /// Receiver below sender with a surplus available: receiver steps up, consuming one.
    R2i,
    /// Receiver below sender, no surplus: nothing changes.
    R2ii,
    /// Receiver above sender, no surplus: receiver steps down, generating one.
    R3i,
    /// Receiver above sender with a surplus around: surplus returned, nothing changes.
    R3ii,
}

impl QaRule {
    pub const ALL: [QaRule; 6] = [QaRule::R1i, QaRule::R1ii, QaRule::R2i, QaRule::R2ii, QaRule::R3i, QaRule::R3ii];

    pub fn tag(self) -> &'static str {
        match self {
            QaRule::R1i => "R1i",
            QaRule::R1ii => "R1ii",
            QaRule::R2i => "R2i",
            QaRule::R2ii => "R2ii",
            QaRule::R3i => "R3i",
            QaRule::R3ii => "R3ii",
        }
    }

    /// Change in total surplus caused by this rule.
    pub fn surplus_delta(self) -> i64 {
        match self {
            QaRule::R3i => 1,
            QaRule::R2i => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for QaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Event emitted by every [`qa_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QaRuleFired {
    pub rule: QaRule,
    pub sender: usize,
    pub receiver: usize,
    /// Receiver's state before the update.
    pub receiver_prior: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QaState {
    x: Vec<i64>,
    s: Vec<u8>,
}

impl QaState {
    /// Fresh state with all surpluses cleared.
    pub fn new(x: Vec<i64>) -> Self {
        let s = vec![0; x.len()];
        Self { x, s }
    }

    /// State with explicit surpluses; each must be 0 or 1.
    pub fn with_surplus(x: Vec<i64>, s: Vec<u8>) -> Self {
        assert_eq!(x.len(), s.len(), "state and surplus lengths differ");
        assert!(s.iter().all(|&v| v <= 1), "surpluses are binary");
        Self { x, s }
    }

    pub fn values(&self) -> &[i64] {
        &self.x
    }

    pub fn surpluses(&self) -> &[u8] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn state_sum(&self) -> i64 {
        self.x.iter().sum()
    }

    pub fn surplus_sum(&self) -> i64 {
        self.s.iter().map(|&v| i64::from(v)).sum()
    }

    /// `(x + s)ᵀ1`, invariant along trajectories.
    pub fn conserved_sum(&self) -> i64 {
        self.state_sum() + self.surplus_sum()
    }

    /// In-place update for edge `(j, i)`.
    pub fn apply(&mut self, edge: Edge) -> Result<QaRuleFired, QaError> {
        let n = self.x.len();
        if edge.from == 0 || edge.to == 0 || edge.from > n || edge.to > n || edge.from == edge.to {
            return Err(QaError::EdgeOutOfRange(edge));
        }
        let (j, i) = (edge.from - 1, edge.to - 1);
        let (xi, xj) = (self.x[i], self.x[j]);
        let (si, sj) = (self.s[i], self.s[j]);
        let pooled = si + sj;

        let rule = if xi == xj {
            if si > 0 && sj > 0 {
                QaRule::R1i
            } else {
                self.s[i] = pooled;
                self.s[j] = 0;
                QaRule::R1ii
            }
        } else if xi < xj {
            if pooled > 0 {
                self.x[i] = xi + 1;
                self.s[i] = pooled - 1;
                self.s[j] = 0;
                QaRule::R2i
            } else {
                QaRule::R2ii
            }
        } else if pooled == 0 {
            self.x[i] = xi - 1;
            self.s[i] = 1;
            self.s[j] = 0;
            QaRule::R3i
        } else {
            QaRule::R3ii
        };
        Ok(QaRuleFired { rule, sender: edge.from, receiver: edge.to, receiver_prior: xi })
    }
}

/// Pure transition: the next state and the rule that fired.
pub fn qa_step(state: &QaState, edge: Edge) -> Result<(QaState, QaRuleFired), QaError> {
    let mut next = state.clone();
    let fired = next.apply(edge)?;
    Ok((next, fired))
}

/// Floor average `L` and ceiling for a state sum over `n` nodes (floor toward -∞).
pub fn average_levels(initial_sum: i64, n: usize) -> (i64, i64) {
    let n = n as i64;
    let low = initial_sum.div_euclid(n);
    let high = if initial_sum.rem_euclid(n) == 0 { low } else { low + 1 };
    (low, high)
}

/// True iff every state equals the floor or ceiling of the initial average.
/// Surpluses are not constrained.
pub fn is_average_consensus(state: &QaState, initial_sum: i64, n: usize) -> bool {
    let (low, high) = average_levels(initial_sum, n);
    state.x.iter().all(|&v| v == low || v == high)
}

/// Generous cap on trajectory length: `10^4 * n^3 * (M - m + 1)`.
pub fn default_max_steps(x0: &[i64]) -> u64 {
    let n = x0.len() as u64;
    let spread = crate::qc::interval_stats(x0).length.unsigned_abs();
    10_000u64.saturating_mul(n * n * n).saturating_mul(spread + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaRun {
    pub final_state: QaState,
    /// First step at which the state is an average consensus.
    pub steps: u64,
}

impl QaRun {
    /// Surplus left over at absorption (diagnostic only).
    pub fn residual_surplus(&self) -> i64 {
        self.final_state.surplus_sum()
    }
}

/// Runs until average consensus, calling `on_step(k, fired, state_after)`
/// after every step `k = 1, 2, ...`.
pub fn run_qa_with<R, F>(
    g: &Digraph,
    model: &ActivationModel,
    x0: &[i64],
    rng: &mut R,
    max_steps: u64,
    mut on_step: F,
) -> Result<QaRun, QaError>
where
    R: Rng + ?Sized,
    F: FnMut(u64, &QaRuleFired, &QaState) -> Result<(), QaError>,
{
    if !g.is_complete() {
        return Err(QaError::UnsupportedTopology);
    }
    if x0.len() != g.node_count() {
        return Err(QaError::DimensionMismatch { expected: g.node_count(), got: x0.len() });
    }
    if max_steps == 0 {
        return Err(QaError::ZeroStepBudget);
    }
    let n = x0.len();
    let initial_sum: i64 = x0.iter().sum();
    let mut state = QaState::new(x0.to_vec());
    let mut k = 0;
    while !is_average_consensus(&state, initial_sum, n) {
        if k == max_steps {
            return Err(QaError::NotConverged { steps: k });
        }
        let fired = state.apply(model.sample_edge(rng))?;
        k += 1;
        on_step(k, &fired, &state)?;
    }
    Ok(QaRun { final_state: state, steps: k })
}

/// Runs until average consensus from a fixed seed, optionally feeding every
/// fired rule to a Lyapunov tracker.
pub fn run_qa(
    g: &Digraph,
    model: &ActivationModel,
    x0: &[i64],
    seed: u64,
    max_steps: u64,
    mut tracker: Option<&mut LyapunovState>,
) -> Result<QaRun, QaError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_qa_with(g, model, x0, &mut rng, max_steps, |_, fired, _| {
        if let Some(t) = tracker.as_deref_mut() {
            t.apply_rule(fired)?;
        }
        Ok(())
    })
}
