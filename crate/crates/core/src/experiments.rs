//! Monte Carlo ensembles, sweeps and trajectory audits.
//!
//! Trial `t` of an ensemble with master seed `s` draws from a ChaCha8 stream
//! seeded with `s` and set to stream `t`, so results never depend on how
//! trials are scheduled across threads. Step counts are aggregated as exact
//! integer sums, which makes merging partial ensembles associative.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{qa_convergence_bound, qc_convergence_bound};
use crate::graph::{complete_digraph, Edge, GraphError, Network};
use crate::init::{qa_worst_init, qc_worst_init, InitError, InitSpec};
use crate::lyapunov::{check_structure, LyapunovError, LyapunovState, TraceRow};
use crate::qa::{self, is_average_consensus, run_qa_with, QaError, QaRule, QaRuleFired, QaState};
use crate::qc::{self, run_qc_with, two_level_state, PolicyKind, QcError, QcPolicy};

pub const DEFAULT_TRIALS: u64 = 2000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error("consensus run failed: {0}")]
    Qc(QcError),
    #[error("averaging run failed: {0}")]
    Qa(QaError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
}

impl ExperimentError {
    /// True for errors caused by the inputs rather than by a run.
    pub fn is_usage(&self) -> bool {
        matches!(self, Self::InvalidConfig(_) | Self::Graph(_) | Self::Init(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Qc,
    Qa,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Qc => "qc",
            Algorithm::Qa => "qa",
        })
    }
}

impl FromStr for Algorithm {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qc" => Ok(Algorithm::Qc),
            "qa" => Ok(Algorithm::Qa),
            _ => Err(ExperimentError::InvalidConfig(format!("unknown algorithm `{s}` (expected qc or qa)"))),
        }
    }
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// `complete:<n>`, `path:<n>`, `ring:<n>` or an edge-list file.
    pub graph: String,
    pub init: InitSpec,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Per-trial step cap; defaults grow with `n` and the initial spread.
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub policy: PolicyKind,
    /// Track the Lyapunov counters during averaging runs.
    #[serde(default)]
    pub tracker: bool,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, graph: impl Into<String>, init: InitSpec) -> Self {
        Self {
            algorithm,
            graph: graph.into(),
            init,
            trials: DEFAULT_TRIALS,
            seed: 0,
            max_steps: None,
            policy: PolicyKind::default(),
            tracker: false,
        }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = Some(max_steps);
        self
    }

    pub fn policy(mut self, policy: PolicyKind) -> Self {
        self.policy = policy;
        self
    }

    pub fn tracker(mut self, on: bool) -> Self {
        self.tracker = on;
        self
    }
}

/// The random stream of trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Exact running sums of per-trial step counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepAccumulator {
    count: u64,
    sum: u128,
    sum_sq: u128,
    min: Option<u64>,
    max: Option<u64>,
    failures: u64,
}

impl StepAccumulator {
    /// Records one trial; `None` is a non-converged trial.
    pub fn push(&mut self, steps: Option<u64>) {
        match steps {
            Some(k) => {
                self.count += 1;
                self.sum += u128::from(k);
                self.sum_sq += u128::from(k) * u128::from(k);
                self.min = Some(self.min.map_or(k, |m| m.min(k)));
                self.max = Some(self.max.map_or(k, |m| m.max(k)));
            }
            None => self.failures += 1,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        let pick = |a: Option<u64>, b: Option<u64>, f: fn(u64, u64) -> u64| match (a, b) {
            (Some(x), Some(y)) => Some(f(x, y)),
            (x, None) => x,
            (None, y) => y,
        };
        Self {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
            min: pick(self.min, other.min, u64::min),
            max: pick(self.max, other.max, u64::max),
            failures: self.failures + other.failures,
        }
    }

    pub fn converged(&self) -> u64 {
        self.count
    }

    pub fn finish(&self) -> TrialStats {
        let n = self.count;
        let mean = if n == 0 { f64::NAN } else { self.sum as f64 / n as f64 };
        let variance = match n {
            0 => f64::NAN,
            1 => 0.0,
            _ => {
                let nu = u128::from(n);
                match nu.checked_mul(self.sum_sq).zip(self.sum.checked_mul(self.sum)) {
                    Some((a, b)) => (a - b) as f64 / (nu * (nu - 1)) as f64,
                    None => {
                        let m = self.sum as f64 / n as f64;
                        (self.sum_sq as f64 - n as f64 * m * m) / (n - 1) as f64
                    }
                }
            }
        };
        let se = if n == 0 { f64::NAN } else { (variance / n as f64).sqrt() };
        TrialStats {
            trials: self.count + self.failures,
            mean,
            variance,
            se,
            min: self.min,
            max: self.max,
            failures: self.failures,
        }
    }
}

/// Summary of an ensemble. Moments are over converged trials only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / converged)`.
    pub se: f64,
    pub min: Option<u64>,
    pub max: Option<u64>,
    pub failures: u64,
}

impl TrialStats {
    pub fn converged(&self) -> u64 {
        self.trials - self.failures
    }

    /// `|mean - target| < k * se`, with an exact match accepted when `se = 0`.
    pub fn within_se(&self, target: f64, k: f64) -> bool {
        let gap = (self.mean - target).abs();
        gap < k * self.se || gap == 0.0
    }
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    network: Network,
    x0: Vec<i64>,
    policy: QcPolicy,
    max_steps: u64,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self, ExperimentError> {
        if config.trials == 0 {
            return Err(ExperimentError::InvalidConfig("trials must be at least 1".into()));
        }
        if config.max_steps == Some(0) {
            return Err(ExperimentError::InvalidConfig("max_steps must be positive".into()));
        }
        let network = Network::from_spec(&config.graph)?;
        let x0 = config.init.values();
        let n = network.graph.node_count();
        if x0.len() != n {
            return Err(ExperimentError::InvalidConfig(format!(
                "initial state has {} entries, graph has {n} nodes",
                x0.len()
            )));
        }
        if config.algorithm == Algorithm::Qa && !network.graph.is_complete() {
            return Err(ExperimentError::InvalidConfig(QaError::UnsupportedTopology.to_string()));
        }
        if config.algorithm == Algorithm::Qc && !network.graph.has_globally_reachable_node() {
            log::warn!("graph `{}` has no globally reachable node; trials will likely not converge", config.graph);
        }
        let max_steps = config.max_steps.unwrap_or_else(|| match config.algorithm {
            Algorithm::Qc => qc::default_max_steps(&x0),
            Algorithm::Qa => qa::default_max_steps(&x0),
        });
        Ok(Self { policy: config.policy.into(), config: config.clone(), network, x0, max_steps })
    }

    /// Replaces the consensus policy, e.g. with a custom selector.
    pub fn with_policy(mut self, policy: QcPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn initial_state(&self) -> &[i64] {
        &self.x0
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    /// Runs one trial. `Ok(None)` means the step cap was reached.
    pub fn run_trial(&self, trial: u64) -> Result<Option<u64>, ExperimentError> {
        let mut rng = trial_rng(self.config.seed, trial);
        let (g, model) = (&self.network.graph, &self.network.activation);
        match self.config.algorithm {
            Algorithm::Qc => match run_qc_with(g, model, &self.x0, &self.policy, &mut rng, self.max_steps) {
                Ok(run) => Ok(Some(run.steps)),
                Err(QcError::NotConverged { .. }) => Ok(None),
                Err(e) => Err(ExperimentError::Qc(e)),
            },
            Algorithm::Qa => {
                let mut tracker = self.config.tracker.then(|| LyapunovState::new(&self.x0));
                let result = run_qa_with(g, model, &self.x0, &mut rng, self.max_steps, |_, fired, _| {
                    if let Some(t) = tracker.as_mut() {
                        t.apply_rule(fired)?;
                    }
                    Ok(())
                });
                match result {
                    Ok(run) => Ok(Some(run.steps)),
                    Err(QaError::NotConverged { .. }) => Ok(None),
                    Err(QaError::Tracker(e)) => Err(ExperimentError::Lyapunov(e)),
                    Err(e) => Err(ExperimentError::Qa(e)),
                }
            }
        }
    }

    /// Runs trials with the given indices in parallel.
    pub fn run_range(&self, trials: Range<u64>) -> Result<StepAccumulator, ExperimentError> {
        trials
            .into_par_iter()
            .map(|t| {
                let mut acc = StepAccumulator::default();
                acc.push(self.run_trial(t)?);
                Ok(acc)
            })
            .try_reduce(StepAccumulator::default, |a, b| Ok(a.merge(b)))
    }

    pub fn run(&self) -> Result<TrialStats, ExperimentError> {
        Ok(self.run_range(0..self.config.trials)?.finish())
    }

    /// Convergence-time bound for this start, when the network is complete
    /// with uniform activation.
    pub fn bound(&self) -> Option<f64> {
        if !self.network.graph.is_complete() || !self.network.activation.is_uniform() {
            return None;
        }
        let n = self.x0.len();
        let iv = qc::interval_stats(&self.x0);
        Some(match self.config.algorithm {
            Algorithm::Qc => qc_convergence_bound::<f64>(n, iv.min, iv.max),
            Algorithm::Qa => {
                let (_, r) = crate::lyapunov::decompose_sum(self.x0.iter().sum(), n);
                qa_convergence_bound::<f64>(n, iv.min, iv.max, r)
            }
        })
    }

    /// Per-step Lyapunov trace of one averaging trial, starting with the
    /// initial row.
    pub fn trace(&self, trial: u64) -> Result<Vec<TraceRow>, ExperimentError> {
        if self.config.algorithm != Algorithm::Qa {
            return Err(ExperimentError::InvalidConfig("traces are only defined for qa".into()));
        }
        let mut rng = trial_rng(self.config.seed, trial);
        let mut tracker = LyapunovState::new(&self.x0);
        let mut rows = vec![TraceRow::capture(0, None, &tracker)];
        let (g, model) = (&self.network.graph, &self.network.activation);
        let result = run_qa_with(g, model, &self.x0, &mut rng, self.max_steps, |k, fired, _| {
            tracker.apply_rule(fired)?;
            rows.push(TraceRow::capture(k, Some(fired.rule), &tracker));
            Ok(())
        });
        match result {
            Ok(_) | Err(QaError::NotConverged { .. }) => Ok(rows),
            Err(QaError::Tracker(e)) => Err(ExperimentError::Lyapunov(e)),
            Err(e) => Err(ExperimentError::Qa(e)),
        }
    }
}

pub fn run_ensemble(config: &ExperimentConfig) -> Result<TrialStats, ExperimentError> {
    Experiment::prepare(config)?.run()
}

/// One output row: the fields shared by `simulate` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub se: f64,
    pub min: Option<u64>,
    pub max: Option<u64>,
    pub failures: u64,
    pub bound: Option<f64>,
}

impl SummaryRow {
    pub fn new(exp: &Experiment, stats: &TrialStats) -> Self {
        Self {
            algorithm: exp.config.algorithm,
            n: exp.x0.len(),
            trials: stats.trials,
            seed: exp.config.seed,
            mean: stats.mean,
            se: stats.se,
            min: stats.min,
            max: stats.max,
            failures: stats.failures,
            bound: exp.bound(),
        }
    }
}

/// Worst-case start on the complete graph of size `n`.
pub fn worst_case_config(algorithm: Algorithm, n: usize, trials: u64, seed: u64) -> ExperimentConfig {
    let init = match algorithm {
        Algorithm::Qc => InitSpec::HalfSplit(n),
        Algorithm::Qa => InitSpec::QaWorst(n),
    };
    ExperimentConfig::new(algorithm, format!("complete:{n}"), init).trials(trials).seed(seed)
}

/// Ensembles from the worst-case start for each `n`, with the matching bound.
pub fn sweep(algorithm: Algorithm, n_values: &[usize], trials: u64, seed: u64) -> Result<Vec<SummaryRow>, ExperimentError> {
    if n_values.is_empty() {
        return Err(ExperimentError::InvalidConfig("no sizes to sweep".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::InvalidConfig("sweep sizes must be strictly ascending".into()));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n < 2) {
        return Err(ExperimentError::InvalidConfig(format!("sweep size {n} below 2")));
    }
    n_values
        .iter()
        .map(|&n| {
            let exp = Experiment::prepare(&worst_case_config(algorithm, n, trials, seed))?;
            let stats = exp.run()?;
            Ok(SummaryRow::new(&exp, &stats))
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// distinct points or non-positive coordinates.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Level index `(V - R)/2` of the tracked triple and whether `S₋ = 0`.
pub fn level_set_membership(tracker: &LyapunovState) -> Result<(u64, bool), ExperimentError> {
    let (v, r) = (tracker.v(), tracker.r());
    let gap = v - r;
    if gap < 0 {
        return Err(LyapunovError::BelowRemainder { v, r }.into());
    }
    if gap % 2 != 0 {
        return Err(LyapunovError::OddLevel(gap).into());
    }
    Ok(((gap / 2) as u64, tracker.s_minus() == 0))
}

/// One averaging update; swappable so audits can be pointed at broken rules.
pub type QaStepFn = fn(&mut QaState, Edge) -> Result<QaRuleFired, QaError>;

pub fn standard_qa_step(state: &mut QaState, edge: Edge) -> Result<QaRuleFired, QaError> {
    state.apply(edge)
}

/// Invariant violations found along one or more averaging trajectories.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub trajectories: u64,
    pub steps: u64,
    pub non_converged: u64,
    /// Strict decreases of `V` observed.
    pub decrements: u64,
    /// Violation counts by check name.
    pub violations: BTreeMap<&'static str, u64>,
    /// First violation seen: (trajectory, step, check).
    pub first: Option<(u64, u64, &'static str)>,
}

impl AuditReport {
    pub fn total_violations(&self) -> u64 {
        self.violations.values().sum()
    }

    pub fn is_clean(&self) -> bool {
        self.total_violations() == 0
    }

    fn flag(&mut self, trajectory: u64, step: u64, check: &'static str) {
        *self.violations.entry(check).or_default() += 1;
        self.first.get_or_insert((trajectory, step, check));
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.trajectories += other.trajectories;
        self.steps += other.steps;
        self.non_converged += other.non_converged;
        self.decrements += other.decrements;
        for (k, v) in other.violations {
            *self.violations.entry(k).or_default() += v;
        }
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Runs one averaging trajectory on the complete graph and checks, at every
/// step: conservation of `(x + s)ᵀ1`, binary surpluses, monotone extremes,
/// the tracker's `D` and surplus totals against the state, `V` non-increasing
/// with decreases of exactly 2 only on consumption below `L` with `S₋ = 0`,
/// the four structural clauses, and `V <= (M - m)n/2 + R`.
pub fn audit_qa_trajectory<R: Rng + ?Sized>(
    x0: &[i64],
    rng: &mut R,
    max_steps: u64,
    step: QaStepFn,
    trajectory: u64,
) -> Result<AuditReport, ExperimentError> {
    let n = x0.len();
    let network = Network::uniform(complete_digraph(n)?)?;
    let total: i64 = x0.iter().sum();
    let iv = qc::interval_stats(x0);
    let mut report = AuditReport { trajectories: 1, ..AuditReport::default() };
    let mut state = QaState::new(x0.to_vec());
    let mut tracker = LyapunovState::new(x0);
    let v_cap2 = (iv.max - iv.min) * n as i64 + 2 * tracker.r();
    let (mut lo, mut hi) = (iv.min, iv.max);

    let mut audit = |k: u64, state: &QaState, tracker: &LyapunovState, report: &mut AuditReport| {
        if state.conserved_sum() != total {
            report.flag(trajectory, k, "conservation");
        }
        if state.surpluses().iter().any(|&s| s > 1) {
            report.flag(trajectory, k, "binary_surplus");
        }
        let now = qc::interval_stats(state.values());
        if now.min < lo {
            report.flag(trajectory, k, "min_non_decreasing");
        }
        if now.max > hi {
            report.flag(trajectory, k, "max_non_increasing");
        }
        lo = now.min;
        hi = now.max;
        if tracker.deviation_of(state) != tracker.d() {
            report.flag(trajectory, k, "deviation_tracking");
        }
        if tracker.s_plus() + tracker.s_minus() != state.surplus_sum() {
            report.flag(trajectory, k, "surplus_tracking");
        }
        for c in check_structure(tracker, state) {
            if !c.passed {
                report.flag(trajectory, k, c.clause);
            }
        }
        if 2 * tracker.v() > v_cap2 {
            report.flag(trajectory, k, "v_upper_bound");
        }
    };

    audit(0, &state, &tracker, &mut report);
    let mut k = 0;
    while !is_average_consensus(&state, total, n) {
        if k == max_steps {
            report.non_converged = 1;
            break;
        }
        let edge = network.activation.sample_edge(rng);
        let fired = step(&mut state, edge).map_err(ExperimentError::Qa)?;
        k += 1;
        let (v_before, s_minus_before) = (tracker.v(), tracker.s_minus());
        if tracker.apply_rule(&fired).is_err() {
            report.flag(trajectory, k, "counter_underflow");
            break;
        }
        let v = tracker.v();
        if v > v_before {
            report.flag(trajectory, k, "v_non_increasing");
        } else if v < v_before {
            report.decrements += 1;
            let legit = v_before - v == 2
                && fired.rule == QaRule::R2i
                && fired.receiver_prior < tracker.l()
                && s_minus_before == 0;
            if !legit {
                report.flag(trajectory, k, "decrement_shape");
            }
        }
        audit(k, &state, &tracker, &mut report);
    }
    report.steps = k;
    Ok(report)
}

/// Uniform random start: `n` uniform on `2..=max_n`, entries uniform on
/// `lo..=hi`.
pub fn random_start<R: Rng + ?Sized>(rng: &mut R, max_n: usize, lo: i64, hi: i64) -> Vec<i64> {
    let n = rng.random_range(2..=max_n);
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Audits `count` trajectories from random starts (sizes `2..=max_n`,
/// entries in `{-5, ..., 5}`); trajectory `t` uses stream `t` of `seed`.
pub fn audit_random_qa(count: u64, max_n: usize, seed: u64, step: QaStepFn) -> Result<AuditReport, ExperimentError> {
    (0..count)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x0 = random_start(&mut rng, max_n, -5, 5);
            audit_qa_trajectory(&x0, &mut rng, qa::default_max_steps(&x0), step, t)
        })
        .try_reduce(AuditReport::default, |a, b| Ok(a.merge(b)))
}

/// One-step transition counts of consensus from the two-level state with
/// `z` ones on the complete graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TransitionTally {
    pub n: usize,
    pub z: usize,
    pub samples: u64,
    pub up: u64,
    pub down: u64,
    pub stay: u64,
}

impl TransitionTally {
    /// Rate of each of the two moves: `z(n - z)/(n(n - 1))`.
    pub fn expected_rate(&self) -> f64 {
        (self.z * (self.n - self.z)) as f64 / (self.n * (self.n - 1)) as f64
    }

    /// Both move frequencies within `k` binomial standard deviations.
    pub fn within(&self, k: f64) -> bool {
        let p = self.expected_rate();
        let big_n = self.samples as f64;
        let tol = k * (p * (1.0 - p) / big_n).sqrt();
        [self.up, self.down].iter().all(|&c| (c as f64 / big_n - p).abs() <= tol)
    }
}

/// Samples `samples` single steps from the two-level state with `z` ones.
pub fn qc_transition_tally(n: usize, z: usize, samples: u64, seed: u64, policy: &QcPolicy) -> Result<TransitionTally, ExperimentError> {
    let network = Network::uniform(complete_digraph(n)?)?;
    let start = two_level_state(n, z).map_err(ExperimentError::Qc)?;
    let mut rng = trial_rng(seed, z as u64);
    let mut tally = TransitionTally { n, z, samples, up: 0, down: 0, stay: 0 };
    for _ in 0..samples {
        let mut s = start.clone();
        s.apply(network.activation.sample_edge(&mut rng), policy).map_err(ExperimentError::Qc)?;
        let ones = s.values().iter().filter(|&&v| v == 1).count();
        if s.values().iter().any(|&v| v != 0 && v != 1) {
            return Err(ExperimentError::InvalidConfig("policy left the two-level set".into()));
        }
        match ones.cmp(&z) {
            std::cmp::Ordering::Greater => tally.up += 1,
            std::cmp::Ordering::Less => tally.down += 1,
            std::cmp::Ordering::Equal => tally.stay += 1,
        }
    }
    Ok(tally)
}

/// Worst-case starts by algorithm.
pub fn worst_case_init(algorithm: Algorithm, n: usize) -> Vec<i64> {
    match algorithm {
        Algorithm::Qc => qc_worst_init(n),
        Algorithm::Qa => qa_worst_init(n),
    }
}
