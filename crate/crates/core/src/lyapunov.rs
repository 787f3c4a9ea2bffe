//! Global surplus bookkeeping and the Lyapunov function of quantized averaging.
//!
//! Write the initial sum as `nL + R` with `0 <= R < n`. Every generated
//! surplus is classified as positive (the generating node moved toward `L`)
//! or negative (it moved away); consumption retires one of them. With
//! `D = Σ|x_i - L|` the function `V = D + S₊ - S₋` never increases, and it
//! only ever drops by exactly 2, when a node below `L` climbs by spending a
//! surplus while no negative surplus is outstanding.

use serde::Serialize;
use thiserror::Error;

use crate::qa::{QaRule, QaRuleFired, QaState};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LyapunovError {
    #[error("{counter} would drop below zero on {rule} at receiver {receiver}")]
    Corruption { counter: &'static str, rule: QaRule, receiver: usize },
    #[error("V - R = {0} is odd; decrements come in steps of 2")]
    OddLevel(i64),
    #[error("V = {v} fell below the remainder R = {r}")]
    BelowRemainder { v: i64, r: i64 },
}

/// `(L, R)` with `total = nL + R`, `L` floored toward -∞ and `0 <= R < n`.
pub fn decompose_sum(total: i64, n: usize) -> (i64, i64) {
    assert!(n >= 1, "need at least one node");
    let n = n as i64;
    (total.div_euclid(n), total.rem_euclid(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LyapunovState {
    n: usize,
    l: i64,
    r: i64,
    d: i64,
    s_plus: i64,
    s_minus: i64,
}

impl LyapunovState {
    /// Tracker for a trajectory starting at `(x0, 0)`.
    pub fn new(x0: &[i64]) -> Self {
        let (l, r) = decompose_sum(x0.iter().sum(), x0.len());
        Self { n: x0.len(), l, r, d: deviation(x0, l), s_plus: 0, s_minus: 0 }
    }

    /// Tracker with explicit counters, e.g. for probing level sets.
    pub fn from_parts(n: usize, l: i64, r: i64, d: i64, s_plus: i64, s_minus: i64) -> Self {
        Self { n, l, r, d, s_plus, s_minus }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> i64 {
        self.l
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn s_plus(&self) -> i64 {
        self.s_plus
    }

    pub fn s_minus(&self) -> i64 {
        self.s_minus
    }

    pub fn v(&self) -> i64 {
        self.d + self.s_plus - self.s_minus
    }

    /// Updates the counters for one protocol step.
    ///
    /// Only generation (`R3i`) and consumption (`R2i`) move anything; the
    /// other four rules leave every state untouched.
    pub fn apply_rule(&mut self, fired: &QaRuleFired) -> Result<(), LyapunovError> {
        let prior = fired.receiver_prior;
        let corrupt = |counter| LyapunovError::Corruption { counter, rule: fired.rule, receiver: fired.receiver };
        match fired.rule {
            QaRule::R3i => {
                if prior > self.l {
                    self.d -= 1;
                    self.s_plus += 1;
                } else {
                    self.d += 1;
                    self.s_minus += 1;
                }
            }
            QaRule::R2i => {
                if prior >= self.l {
                    if self.s_plus == 0 {
                        return Err(corrupt("S+"));
                    }
                    self.d += 1;
                    self.s_plus -= 1;
                } else if self.s_minus > 0 {
                    self.d -= 1;
                    self.s_minus -= 1;
                } else {
                    if self.s_plus == 0 {
                        return Err(corrupt("S+"));
                    }
                    self.d -= 1;
                    self.s_plus -= 1;
                }
            }
            QaRule::R1i | QaRule::R1ii | QaRule::R2ii | QaRule::R3ii => {}
        }
        Ok(())
    }

    /// Recomputes `D` from a state; used to cross-check the incremental value.
    pub fn deviation_of(&self, state: &QaState) -> i64 {
        deviation(state.values(), self.l)
    }
}

fn deviation(x: &[i64], l: i64) -> i64 {
    x.iter().map(|&v| (v - l).abs()).sum()
}

pub fn init_tracker(x0: &[i64]) -> LyapunovState {
    LyapunovState::new(x0)
}

/// Outcome of one structural clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseCheck {
    pub clause: &'static str,
    pub passed: bool,
}

/// Evaluates the four structural facts about `V`:
///
/// 1. `V >= R`;
/// 2. `V = R` implies `S₋ = 0` and every `x_i >= L`;
/// 3. `D = 0` implies `S₋ = 0` and `V = S₊ = R`;
/// 4. when `R = 0`: `D = 0` iff `V = 0`, and then `S₊ = S₋ = 0`.
pub fn check_structure(tracker: &LyapunovState, state: &QaState) -> Vec<ClauseCheck> {
    let t = tracker;
    let v = t.v();
    let lower = v >= t.r;
    let floor = v != t.r || (t.s_minus == 0 && state.values().iter().all(|&x| x >= t.l));
    let zero_error = t.d != 0 || (t.s_minus == 0 && v == t.r && t.s_plus == t.r);
    let zero_remainder = t.r != 0
        || ((t.d == 0) == (v == 0) && (t.d != 0 || (t.s_plus == 0 && t.s_minus == 0)));
    vec![
        ClauseCheck { clause: "v_at_least_r", passed: lower },
        ClauseCheck { clause: "v_eq_r_implies_floor", passed: floor },
        ClauseCheck { clause: "zero_error_implies_v_eq_r", passed: zero_error },
        ClauseCheck { clause: "zero_remainder_equivalence", passed: zero_remainder },
    ]
}

/// Largest possible `V` for starts in the box `[m, M]^n`: `(M - m)n/2 + R`.
pub fn v_upper_bound<T: Scalar>(n: usize, m: i64, big_m: i64, r: i64) -> T {
    T::ratio((big_m - m) * n as i64, 2) + T::from_int(r)
}

/// Level sets of the Lyapunov function.
///
/// `Level(l)` holds triples with `V = 2l + R`; `Remainder` is `V = R`, the
/// floor of the descent. The "core" of a level additionally has `S₋ = 0`,
/// the only place the trajectory can enter or leave the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSet {
    Remainder,
    Level(u64),
}

impl LevelSet {
    pub fn target_v(self, r: i64) -> i64 {
        match self {
            LevelSet::Remainder => r,
            LevelSet::Level(l) => 2 * l as i64 + r,
        }
    }

    pub fn contains(self, tracker: &LyapunovState) -> bool {
        tracker.v() == self.target_v(tracker.r())
    }

    pub fn contains_core(self, tracker: &LyapunovState) -> bool {
        self.contains(tracker) && tracker.s_minus() == 0 && tracker.s_plus() >= 0
    }
}

/// One row of a per-step trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub k: u64,
    pub rule: String,
    pub d: i64,
    pub s_plus: i64,
    pub s_minus: i64,
    pub v: i64,
}

impl TraceRow {
    pub fn capture(k: u64, rule: Option<QaRule>, t: &LyapunovState) -> Self {
        Self {
            k,
            rule: rule.map(|r| r.tag().to_string()).unwrap_or_else(|| "init".into()),
            d: t.d(),
            s_plus: t.s_plus(),
            s_minus: t.s_minus(),
            v: t.v(),
        }
    }
}
