//! Self-check suite: closed forms against the linear solver, simulations
//! against exact values and bounds, and trajectory audits.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::bounds::{
    qa_convergence_bound, qa_decrement_bound, qa_max_decay_bound, qc_convergence_bound, qc_shrink_bound,
};
use crate::experiments::{
    audit_qa_trajectory, audit_random_qa, loglog_slope, qc_transition_tally, run_ensemble, standard_qa_step,
    sweep, trial_rng, Algorithm, AuditReport, ExperimentConfig, ExperimentError, QaStepFn,
};
use crate::init::{qa_worst_init, InitSpec};
use crate::markov::{
    consensus_shrink_walk, max_decay_walk, one_level_ladder, solve_hitting_times, LadderWalk, MarkovError,
    ReflectedWalk, SymmetricWalk,
};
use crate::qc::QcPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyDepth {
    /// `n <= 8`, 2,000 trials per ensemble.
    Small,
    Full,
}

impl FromStr for VerifyDepth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small" => Ok(VerifyDepth::Small),
            "full" => Ok(VerifyDepth::Full),
            _ => Err(format!("unknown depth `{s}` (expected small or full)")),
        }
    }
}

impl fmt::Display for VerifyDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyDepth::Small => "small",
            VerifyDepth::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub depth: VerifyDepth,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub type SymmetricClosedForm = fn(&SymmetricWalk<f64>, usize) -> Result<f64, MarkovError>;

/// Replaceable pieces, so a deliberately broken rule or formula can be shown
/// to trip the suite.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub qa_step: QaStepFn,
    pub symmetric_closed_form: SymmetricClosedForm,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { qa_step: standard_qa_step, symmetric_closed_form: |w, z| w.closed_form(z) }
    }
}

/// Relative error tolerance for closed form versus solver.
pub const ORACLE_TOL: f64 = 1e-9;

/// Largest relative disagreement found over a batch of random chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub instances: usize,
    pub worst_rel_error: f64,
    /// Ladder only: instances where the lower-row bound failed to strictly
    /// exceed the solver value.
    pub bound_failures: usize,
}

impl OracleOutcome {
    pub fn passed(&self) -> bool {
        self.worst_rel_error <= ORACLE_TOL && self.bound_failures == 0
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Symmetric walk of length `n` with rates uniform on `[0.02, 0.5]`.
pub fn random_symmetric_walk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymmetricWalk<f64> {
    SymmetricWalk::from_rates((1..n).map(|_| rng.random_range(0.02..=0.5)).collect())
        .expect("rates drawn inside (0, 1/2]")
}

/// Reflected walk of length `n`: `p_z` uniform on `[0.05, 0.4]`, `q_z` a
/// random multiple in `[0.2, 1.5]` of `p_z`.
pub fn random_reflected_walk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ReflectedWalk<f64> {
    let up: Vec<f64> = (1..n).map(|_| rng.random_range(0.05..=0.4)).collect();
    let down = up[1..].iter().map(|&p| p * rng.random_range(0.2..=1.5)).collect();
    ReflectedWalk::new(up, down).expect("rates fit in a row")
}

/// Ladder with `n - 1` columns: forward `[0.05, 0.3]`, backward a multiple in
/// `[0.2, 1.0]` of forward, crossing `[0.02, 0.3]`.
pub fn random_ladder_walk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LadderWalk<f64> {
    let up: Vec<f64> = (1..n).map(|_| rng.random_range(0.05..=0.3)).collect();
    let down = up[1..].iter().map(|&p| p * rng.random_range(0.2..=1.0)).collect();
    let cross = (1..n).map(|_| rng.random_range(0.02..=0.3)).collect();
    LadderWalk::new(up, down, cross).expect("rates fit in a row")
}

/// Compares every interior closed-form value with the solver on `count`
/// random symmetric walks of length `2..=max_n`.
pub fn oracle_symmetric(count: usize, max_n: usize, seed: u64, closed: SymmetricClosedForm) -> Result<OracleOutcome, MarkovError> {
    let mut rng = trial_rng(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let n = rng.random_range(2..=max_n);
        let walk = random_symmetric_walk(&mut rng, n);
        let e = solve_hitting_times(&walk.to_chain())?;
        for z in 1..walk.n() {
            worst = worst.max(rel_err(closed(&walk, z)?, e[z]));
        }
    }
    Ok(OracleOutcome { instances: count, worst_rel_error: worst, bound_failures: 0 })
}

pub fn oracle_reflected(count: usize, max_n: usize, seed: u64) -> Result<OracleOutcome, MarkovError> {
    let mut rng = trial_rng(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let n = rng.random_range(2..=max_n);
        let walk = random_reflected_walk(&mut rng, n);
        let e = solve_hitting_times(&walk.to_chain())?;
        for z in 1..walk.n() {
            worst = worst.max(rel_err(walk.closed_form(z)?, e[z - 1]));
        }
    }
    Ok(OracleOutcome { instances: count, worst_rel_error: worst, bound_failures: 0 })
}

pub fn oracle_ladder(count: usize, max_n: usize, seed: u64) -> Result<OracleOutcome, MarkovError> {
    let mut rng = trial_rng(seed, 3);
    let mut worst: f64 = 0.0;
    let mut bound_failures = 0;
    for _ in 0..count {
        let n = rng.random_range(2..=max_n);
        let walk = random_ladder_walk(&mut rng, n);
        let e = solve_hitting_times(&walk.to_chain())?;
        let last = walk.n() - 1;
        let cf = walk.closed_form()?;
        worst = worst.max(rel_err(cf.upper_exact, e[walk.state_index(last, true)]));
        if e[walk.state_index(last, false)] >= cf.lower_bound {
            bound_failures += 1;
        }
    }
    Ok(OracleOutcome { instances: count, worst_rel_error: worst, bound_failures })
}

/// Solver values for the worked ladder with `n = 3`, in the order
/// `(1 upper, 1 lower, 2 upper, 2 lower)`, plus the closed form and bound.
pub fn worked_ladder() -> Result<(Vec<BigRational>, BigRational, BigRational), MarkovError> {
    let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    let walk = LadderWalk::new(vec![q(1, 3), q(1, 4)], vec![q(1, 4)], vec![q(1, 3), q(1, 4)])?;
    let e = solve_hitting_times(&walk.to_chain())?;
    let values = vec![
        e[walk.state_index(1, true)].clone(),
        e[walk.state_index(1, false)].clone(),
        e[walk.state_index(2, true)].clone(),
        e[walk.state_index(2, false)].clone(),
    ];
    let cf = walk.closed_form()?;
    Ok((values, cf.upper_exact, cf.lower_bound))
}

/// Checks names grouped by the audit they read.
pub const STATE_INVARIANTS: [&str; 4] = ["conservation", "binary_surplus", "min_non_decreasing", "max_non_increasing"];

pub fn split_audit(report: &AuditReport) -> (u64, u64) {
    let mut state = 0;
    let mut lyap = 0;
    for (k, v) in &report.violations {
        if STATE_INVARIANTS.contains(k) {
            state += v;
        } else {
            lyap += v;
        }
    }
    (state, lyap)
}

struct Plan {
    oracle_n: usize,
    ensemble_trials: u64,
    exact_trials: u64,
    qc_sizes: &'static [usize],
    qa_sizes: &'static [usize],
    audits: u64,
    audit_n: usize,
    transition_sizes: &'static [usize],
    transition_samples: u64,
}

impl Plan {
    fn for_depth(depth: VerifyDepth) -> Self {
        match depth {
            VerifyDepth::Small => Plan {
                oracle_n: 8,
                ensemble_trials: 2000,
                exact_trials: 2000,
                qc_sizes: &[2, 4, 8],
                qa_sizes: &[4, 8],
                audits: 200,
                audit_n: 8,
                transition_sizes: &[4],
                transition_samples: 10_000,
            },
            VerifyDepth::Full => Plan {
                oracle_n: 50,
                ensemble_trials: 2000,
                exact_trials: 20_000,
                qc_sizes: &[4, 8, 16, 32],
                qa_sizes: &[4, 8, 16],
                audits: 1000,
                audit_n: 10,
                transition_sizes: &[4, 6],
                transition_samples: 100_000,
            },
        }
    }
}

type CheckResult = Result<(bool, String), String>;

fn run_check(name: &'static str, f: impl FnOnce() -> CheckResult) -> CheckOutcome {
    let t0 = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome { name, passed, detail, seconds: t0.elapsed().as_secs_f64() }
}

fn oracle_detail(o: &OracleOutcome) -> (bool, String) {
    let mut detail = format!("{} instances, worst relative error {:.3e}", o.instances, o.worst_rel_error);
    if o.bound_failures > 0 {
        detail.push_str(&format!(", {} bound failures", o.bound_failures));
    }
    (o.passed(), detail)
}

fn audit_line(rep: &AuditReport) -> String {
    let mut line = format!("{} trajectories, {} steps", rep.trajectories, rep.steps);
    if rep.non_converged > 0 {
        line.push_str(&format!(", {} non-converged", rep.non_converged));
    }
    if let Some((t, k, check)) = rep.first {
        line.push_str(&format!(", first `{check}` at trajectory {t} step {k}"));
    }
    line
}

fn stats_err(e: ExperimentError) -> String {
    e.to_string()
}

pub fn verify_suite(depth: VerifyDepth, seed: u64) -> VerifyReport {
    verify_suite_with(depth, seed, &Hooks::default())
}

pub fn verify_suite_with(depth: VerifyDepth, seed: u64, hooks: &Hooks) -> VerifyReport {
    let plan = Plan::for_depth(depth);
    let mut checks = Vec::new();
    let oracle_count = 100;

    checks.push(run_check("oracle_symmetric_walk", || {
        oracle_symmetric(oracle_count, plan.oracle_n, seed, hooks.symmetric_closed_form)
            .map(|o| oracle_detail(&o))
            .map_err(|e| e.to_string())
    }));
    checks.push(run_check("oracle_reflected_walk", || {
        oracle_reflected(oracle_count, plan.oracle_n, seed).map(|o| oracle_detail(&o)).map_err(|e| e.to_string())
    }));
    checks.push(run_check("oracle_ladder_walk", || {
        oracle_ladder(oracle_count, plan.oracle_n, seed).map(|o| oracle_detail(&o)).map_err(|e| e.to_string())
    }));
    checks.push(run_check("worked_ladder_exact", || {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let (values, exact, bound) = worked_ladder().map_err(|e| e.to_string())?;
        let want = vec![q(75, 4), q(41, 2), q(14, 1), q(77, 4)];
        let ok = values == want && exact == q(14, 1) && bound == q(28, 1) && values[3] < bound;
        let shown: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        Ok((ok, format!("solver ({}), closed form {exact}, bound {bound}", shown.join(", "))))
    }));

    checks.push(run_check("qc_two_level_exact", || {
        let mut lines = Vec::new();
        let mut ok = true;
        for &(n, z) in &[(3usize, 1usize), (5, 2), (8, 4)] {
            let exact = solve_hitting_times(&consensus_shrink_walk::<f64>(n).map_err(|e| e.to_string())?.to_chain())
                .map_err(|e| e.to_string())?[z];
            let cfg = ExperimentConfig::new(Algorithm::Qc, format!("complete:{n}"), InitSpec::TwoLevel { n, z })
                .trials(plan.exact_trials)
                .seed(seed);
            let s = run_ensemble(&cfg).map_err(stats_err)?;
            ok &= s.failures == 0 && s.within_se(exact, 3.0);
            lines.push(format!("n={n} z={z}: {:.4}±{:.4} vs {exact:.4}", s.mean, s.se));
        }
        Ok((ok, lines.join("; ")))
    }));

    checks.push(run_check("qc_bound_dominance", || {
        let rows = sweep(Algorithm::Qc, plan.qc_sizes, plan.ensemble_trials, seed).map_err(stats_err)?;
        let mut ok = true;
        let mut lines = Vec::new();
        for r in &rows {
            let bound = qc_shrink_bound::<f64>(r.n);
            ok &= r.failures == 0 && r.mean + 3.0 * r.se < bound;
            lines.push(format!("n={}: {:.2}+3·{:.2} < {bound}", r.n, r.mean, r.se));
        }
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.n >= 4).map(|r| (r.n as f64, r.mean)).collect();
        if pts.len() >= 3 {
            let slope = loglog_slope(&pts).ok_or("slope undefined")?;
            ok &= (1.5..=2.3).contains(&slope);
            lines.push(format!("slope {slope:.3}"));
        }
        Ok((ok, lines.join("; ")))
    }));

    checks.push(run_check("qa_two_node_exact", || {
        let cfg = ExperimentConfig::new(Algorithm::Qa, "complete:2", InitSpec::Explicit(vec![2, 0]))
            .trials(plan.exact_trials)
            .seed(seed);
        let s = run_ensemble(&cfg).map_err(stats_err)?;
        Ok((s.failures == 0 && s.within_se(4.0, 3.0), format!("{:.4}±{:.4} vs 4", s.mean, s.se)))
    }));

    checks.push(run_check("qa_bound_dominance", || {
        let rows = sweep(Algorithm::Qa, plan.qa_sizes, plan.ensemble_trials, seed).map_err(stats_err)?;
        let mut ok = true;
        let mut lines = Vec::new();
        for r in &rows {
            let bound = qa_convergence_bound::<f64>(r.n, 0, 2, 0);
            ok &= r.failures == 0 && r.mean + 3.0 * r.se < bound;
            lines.push(format!("n={}: {:.2}+3·{:.2} < {bound}, {} failures", r.n, r.mean, r.se, r.failures));
        }
        Ok((ok, lines.join("; ")))
    }));

    checks.push(run_check("qa_worst_start_single_level", || {
        let mut ok = true;
        let mut total = AuditReport::default();
        for (t, &n) in plan.qa_sizes.iter().enumerate() {
            let x0 = qa_worst_init(n);
            for k in 0..20u64 {
                let mut rng = trial_rng(seed, 1000 * t as u64 + k);
                let rep = audit_qa_trajectory(&x0, &mut rng, crate::qa::default_max_steps(&x0), hooks.qa_step, k)
                    .map_err(stats_err)?;
                ok &= rep.decrements == 1 && rep.non_converged == 0 && rep.is_clean();
                total = total.merge(rep);
            }
        }
        let v0 = crate::lyapunov::LyapunovState::new(&qa_worst_init(plan.qa_sizes[0])).v();
        ok &= v0 == 2;
        Ok((ok, format!("V(0) = {v0}, {} trajectories, {} decrements", total.trajectories, total.decrements)))
    }));

    // one batch of trajectories feeds both audit checks
    let mut audit = None;
    checks.push(run_check("qa_state_invariants", || {
        let rep = audit_random_qa(plan.audits, plan.audit_n, seed, hooks.qa_step).map_err(stats_err)?;
        let (v, _) = split_audit(&rep);
        let v = v + rep.non_converged;
        let line = audit_line(&rep);
        audit = Some(rep);
        Ok((v == 0, format!("{v} violations; {line}")))
    }));
    checks.push(run_check("lyapunov_suite", || {
        let rep = audit.ok_or("trajectory audit did not run")?;
        let (_, v) = split_audit(&rep);
        Ok((v == 0, format!("{v} violations; {}", audit_line(&rep))))
    }));

    checks.push(run_check("qc_transition_rates", || {
        let mut ok = true;
        let mut worst = 0.0f64;
        for &n in plan.transition_sizes {
            for z in 1..n {
                let t = qc_transition_tally(n, z, plan.transition_samples, seed, &QcPolicy::Adopt).map_err(stats_err)?;
                ok &= t.within(4.0);
                let p = t.expected_rate();
                let sd = (p * (1.0 - p) / t.samples as f64).sqrt();
                for c in [t.up, t.down] {
                    worst = worst.max((c as f64 / t.samples as f64 - p).abs() / sd);
                }
            }
        }
        Ok((ok, format!("worst deviation {worst:.2} sd (limit 4)")))
    }));

    checks.push(run_check("bound_regression", || {
        let q = |a: i64| BigRational::from_integer(a.into());
        let mut ok = qc_convergence_bound::<BigRational>(10, 0, 1) == q(90)
            && qa_convergence_bound::<BigRational>(4, 0, 2, 0) == q(144)
            && qa_decrement_bound::<BigRational>(4) == q(72)
            && qa_max_decay_bound::<BigRational>(10, 4).ok() == Some(q(45))
            && qc_shrink_bound::<BigRational>(3) == q(6);
        let mut tested = 0;
        for n in 4..=plan.oracle_n.max(16) {
            let ladder = one_level_ladder::<BigRational>(n)
                .and_then(|w| w.closed_form())
                .map_err(|e| e.to_string())?;
            let cap = qa_decrement_bound::<BigRational>(n);
            ok &= ladder.upper_exact < cap;
            // the (1 + p/d) bound itself overshoots the cap for small n, so
            // the lower-row start is checked against the solver instead
            let cap_f = qa_decrement_bound::<f64>(n);
            let walk = one_level_ladder::<f64>(n).map_err(|e| e.to_string())?;
            let e = solve_hitting_times(&walk.to_chain()).map_err(|e| e.to_string())?;
            ok &= e[walk.state_index(n - 1, false)] < cap_f;
            for r in 2..n {
                let walk = max_decay_walk::<BigRational>(n, r).map_err(|e| e.to_string())?;
                let e1 = walk.closed_form(1).map_err(|e| e.to_string())?;
                ok &= e1 < qa_max_decay_bound::<BigRational>(n, r as i64).map_err(|e| e.to_string())?;
                tested += 1;
            }
        }
        Ok((ok, format!("five exact values, {tested} (n, R) decay pairs")))
    }));

    VerifyReport { depth, seed, checks }
}
