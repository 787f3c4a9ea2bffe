//! One PASS/FAIL line per acceptance criterion. Oracles here are written
//! independently of the library: exhaustive state enumeration with a local
//! dense solver, a local copy of the protocol rules, and literal constants.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};

use qgossip::experiments::{audit_random_qa, qc_transition_tally, standard_qa_step, sweep, Algorithm};
use qgossip::markov::{consensus_shrink_walk, max_decay_walk, one_level_ladder, LadderWalk};
use qgossip::verify::{oracle_ladder, oracle_reflected, oracle_symmetric, split_audit, verify_suite_with, Hooks};
use qgossip::{
    loglog_slope, qa_convergence_bound, qa_decrement_bound, qa_max_decay_bound, qc_convergence_bound,
    qc_shrink_bound, run_ensemble, solve_hitting_times, ExperimentConfig, InitSpec, QaError, QaRule, QaState,
    VerifyDepth,
};
use qgossip::qa::QaRuleFired;
use qgossip::Edge;

const SEED: u64 = 20240917;

type Outcome = Result<(bool, String), String>;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// Solves `a x = b` by elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for j in c..k {
                    a[r][j] -= f * a[c][j];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn exact_solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let k = b.len();
    for c in 0..k {
        let piv = (c..k).find(|&i| !a[i][c].is_zero()).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..k {
            let f = &a[r][c] / &a[c][c];
            for j in c..k {
                let d = &f * &a[c][j];
                a[r][j] -= d;
            }
            let d = &f * &b[c];
            b[r] -= d;
        }
    }
    let mut x = vec![BigRational::zero(); k];
    for r in (0..k).rev() {
        let mut s = b[r].clone();
        for j in r + 1..k {
            s -= &a[r][j] * &x[j];
        }
        x[r] = s / &a[r][r];
    }
    x
}

/// Mean hitting time of `done` from `start` over the reachable state space,
/// where every ordered pair of nodes is activated with equal probability.
fn enumerate_mean<S: Ord + Clone>(
    start: S,
    n: usize,
    step: impl Fn(&S, usize, usize) -> S,
    done: impl Fn(&S) -> bool,
) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i))).collect();
    let w = 1.0 / pairs.len() as f64;
    let mut index = BTreeMap::new();
    let mut order = vec![start.clone()];
    index.insert(start, 0usize);
    let mut rows: Vec<BTreeMap<usize, f64>> = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let s = order[k].clone();
        let mut row = BTreeMap::new();
        if !done(&s) {
            for &(j, i) in &pairs {
                let t = step(&s, j, i);
                let id = *index.entry(t.clone()).or_insert_with(|| {
                    order.push(t);
                    order.len() - 1
                });
                *row.entry(id).or_insert(0.0) += w;
            }
        }
        rows.push(row);
        k += 1;
    }
    let m = order.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (r, row) in rows.iter().enumerate() {
        a[r][r] = 1.0;
        if !row.is_empty() {
            b[r] = 1.0;
            for (&c, &p) in row {
                a[r][c] -= p;
            }
        }
    }
    dense_solve(a, b)[0]
}

/// Reference consensus rule: the receiver adopts the sender's value.
#[allow(clippy::ptr_arg)]
fn qc_reference(x: &Vec<i64>, j: usize, i: usize) -> Vec<i64> {
    let mut y = x.to_vec();
    y[i] = x[j];
    y
}

/// Reference averaging rules with binary surpluses, sender `j`, receiver `i`.
fn qa_reference(st: &(Vec<i64>, Vec<u8>), j: usize, i: usize) -> (Vec<i64>, Vec<u8>) {
    let (mut x, mut s) = st.clone();
    let pooled = s[i] + s[j];
    if x[i] == x[j] {
        if !(s[i] == 1 && s[j] == 1) {
            s[i] = pooled;
            s[j] = 0;
        }
    } else if x[i] < x[j] {
        if pooled > 0 {
            x[i] += 1;
            s[i] = pooled - 1;
            s[j] = 0;
        }
    } else if pooled == 0 {
        x[i] -= 1;
        s[i] = 1;
        s[j] = 0;
    }
    (x, s)
}

fn at_average(x: &[i64], total: i64) -> bool {
    let n = x.len() as i64;
    let lo = total.div_euclid(n);
    x.iter().all(|&v| v == lo || v == lo + i64::from(total.rem_euclid(n) != 0))
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let sym = oracle_symmetric(100, 50, SEED, |w, z| w.closed_form(z)).map_err(|e| e.to_string())?;
    let refl = oracle_reflected(100, 50, SEED).map_err(|e| e.to_string())?;
    let lad = oracle_ladder(100, 50, SEED).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let worst = sym.worst_rel_error.max(refl.worst_rel_error).max(lad.worst_rel_error);
    let ok = worst <= 1e-9 && lad.bound_failures == 0 && secs < 10.0 && sym.instances == 100;
    Ok((ok, format!("3x100 instances n<=50, worst rel err {worst:.2e}, ladder bound failures {}, {secs:.2}s", lad.bound_failures)))
}

fn criterion_2() -> Outcome {
    // States 1u, 1l, 2u, 2l; absorbing column 3.
    let p = [
        vec![q(1, 3), q(1, 3), q(1, 3), q(0, 1)],
        vec![q(1, 3), q(1, 3), q(0, 1), q(1, 3)],
        vec![q(1, 4), q(0, 1), q(1, 4), q(1, 4)],
        vec![q(0, 1), q(1, 4), q(1, 4), q(1, 2)],
    ];
    let a: Vec<Vec<BigRational>> = (0..4)
        .map(|r| (0..4).map(|c| if r == c { BigRational::one() - &p[r][c] } else { -p[r][c].clone() }).collect())
        .collect();
    let local = exact_solve(a, vec![BigRational::one(); 4]);
    let expected = [q(75, 4), q(41, 2), q(14, 1), q(77, 4)];

    let walk = LadderWalk::new(vec![q(1, 3), q(1, 4)], vec![q(1, 4)], vec![q(1, 3), q(1, 4)]).map_err(|e| e.to_string())?;
    let e = solve_hitting_times(&walk.to_chain()).map_err(|e| e.to_string())?;
    let lib: Vec<BigRational> = [(1, true), (1, false), (2, true), (2, false)]
        .iter()
        .map(|&(z, u)| e[walk.state_index(z, u)].clone())
        .collect();
    let cf = walk.closed_form().map_err(|e| e.to_string())?;
    let ok = local == expected && lib == expected && cf.upper_exact == q(14, 1) && cf.lower_bound == q(28, 1)
        && cf.lower_bound > lib[3];
    let shown: Vec<String> = lib.iter().map(ToString::to_string).collect();
    Ok((ok, format!("solver ({}), closed form {}, bound {}", shown.join(", "), cf.upper_exact, cf.lower_bound)))
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, z) in [(3usize, 1usize), (5, 2), (8, 4)] {
        let start: Vec<i64> = (0..n).map(|k| i64::from(k < z)).collect();
        let oracle = enumerate_mean(start, n, qc_reference, |x| x.iter().all(|&v| v == x[0]));
        let walk = consensus_shrink_walk::<f64>(n).map_err(|e| e.to_string())?;
        let solver = solve_hitting_times(&walk.to_chain()).map_err(|e| e.to_string())?[z];
        let cfg = ExperimentConfig::new(Algorithm::Qc, format!("complete:{n}"), InitSpec::TwoLevel { n, z })
            .trials(20_000)
            .seed(SEED);
        let stats = run_ensemble(&cfg).map_err(|e| e.to_string())?;
        let agree = (oracle - solver).abs() <= 1e-9 * solver;
        let hit = stats.within_se(solver, 3.0) && stats.failures == 0;
        ok &= agree && hit;
        parts.push(format!("({n},{z}) mean {:.4} se {:.4} vs {solver:.4}", stats.mean, stats.se));
    }
    if (enumerate_mean(vec![1, 0, 0], 3, qc_reference, |x| x.iter().all(|&v| v == x[0])) - 3.0).abs() > 1e-12 {
        ok = false;
    }
    let secs = t0.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    Ok((ok, format!("{}, {secs:.2}s", parts.join("; "))))
}

fn criterion_4() -> Outcome {
    let sizes = [4usize, 8, 16, 32];
    let rows = sweep(Algorithm::Qc, &sizes, 2000, SEED).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut points = Vec::new();
    let mut parts = Vec::new();
    for row in &rows {
        let bound = (row.n * (row.n - 1)) as f64;
        ok &= row.failures == 0 && row.mean + 3.0 * row.se < bound;
        points.push((row.n as f64, row.mean));
        parts.push(format!("n={} {:.2}+3*{:.2}<{bound}", row.n, row.mean, row.se));
    }
    let slope = loglog_slope(&points).ok_or("slope undefined")?;
    ok &= (1.5..=2.3).contains(&slope) && rows.len() == sizes.len();
    Ok((ok, format!("{}; slope {slope:.3}", parts.join(", "))))
}

fn criterion_5() -> Outcome {
    let oracle = enumerate_mean((vec![2, 0], vec![0, 0]), 2, qa_reference, |st| at_average(&st.0, 2));
    let cfg = ExperimentConfig::new(Algorithm::Qa, "complete:2", InitSpec::Explicit(vec![2, 0])).trials(20_000).seed(SEED);
    let stats = run_ensemble(&cfg).map_err(|e| e.to_string())?;
    let ok = (oracle - 4.0).abs() < 1e-12 && stats.within_se(4.0, 3.0) && stats.failures == 0;
    Ok((ok, format!("mean {:.4} se {:.4} vs 4.0 (enumerated {oracle})", stats.mean, stats.se)))
}

fn criterion_6() -> Outcome {
    let rows = sweep(Algorithm::Qa, &[4, 8, 16], 2000, SEED).map_err(|e| e.to_string())?;
    let mut ok = rows.len() == 3;
    let mut parts = Vec::new();
    for row in &rows {
        let n = row.n as f64;
        let local = 1.5 * n * n * (n - 1.0) * 2.0;
        let lib: f64 = qa_convergence_bound(row.n, 0, 2, 0);
        ok &= (local - lib).abs() < 1e-9 && row.failures == 0 && row.mean + 3.0 * row.se < lib;
        parts.push(format!("n={} {:.2}+3*{:.2}<{lib}, failures {}", row.n, row.mean, row.se, row.failures));
    }
    Ok((ok, parts.join("; ")))
}

fn criteria_7_8() -> Result<[(bool, String); 2], String> {
    let rep = audit_random_qa(1000, 10, SEED, standard_qa_step).map_err(|e| e.to_string())?;
    let (state, lyap) = split_audit(&rep);
    let base = rep.trajectories == 1000 && rep.non_converged == 0;
    let head = format!("{} trajectories, {} steps", rep.trajectories, rep.steps);
    Ok([
        (base && state == 0, format!("{head}, {state} state-invariant violations")),
        (
            base && lyap == 0 && rep.decrements > 0,
            format!("{head}, {} decrements, {lyap} Lyapunov violations", rep.decrements),
        ),
    ])
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in [4usize, 6] {
        for z in 1..n {
            let t = qc_transition_tally(n, z, 100_000, SEED, &Default::default()).map_err(|e| e.to_string())?;
            let p = (z * (n - z)) as f64 / (n * (n - 1)) as f64;
            let sd = (p * (1.0 - p) / 1e5).sqrt();
            for c in [t.up, t.down] {
                let dev = (c as f64 / 1e5 - p).abs() / sd;
                worst = worst.max(dev);
                ok &= dev <= 4.0;
            }
            ok &= t.up + t.down + t.stay == 100_000;
            cases += 1;
        }
    }
    Ok((ok, format!("{cases} states, N=1e5 each, worst deviation {worst:.2} sd")))
}

fn criterion_10() -> Outcome {
    let exact: [(BigRational, i64); 5] = [
        (qc_convergence_bound(10, 0, 1), 90),
        (qa_convergence_bound(4, 0, 2, 0), 144),
        (qa_decrement_bound(4), 72),
        (qa_max_decay_bound(10, 4).map_err(|e| e.to_string())?, 45),
        (qc_shrink_bound(3), 6),
    ];
    let mut ok = exact.iter().all(|(v, want)| *v == q(*want, 1));
    let mut checked = 0;
    for n in 4..=50usize {
        let l1 = one_level_ladder::<BigRational>(n).map_err(|e| e.to_string())?.closed_form().map_err(|e| e.to_string())?;
        let local = q(6 * (n * (n - 1)) as i64, 1);
        ok &= qa_decrement_bound::<BigRational>(n) == local && local > l1.upper_exact;
        checked += 1;
        for r in 2..n {
            let walk = max_decay_walk::<BigRational>(n, r).map_err(|e| e.to_string())?;
            let e1 = walk.closed_form(1).map_err(|e| e.to_string())?;
            let bound: BigRational = qa_max_decay_bound(n, r as i64).map_err(|e| e.to_string())?;
            ok &= bound > e1;
            checked += 1;
        }
    }
    Ok((ok, format!("5 exact values, {checked} dominance pairs over n in 4..=50")))
}

fn leaky_step(state: &mut QaState, edge: Edge) -> Result<QaRuleFired, QaError> {
    let before = state.surpluses().to_vec();
    let fired = standard_qa_step(state, edge)?;
    if fired.rule == QaRule::R2i && before[edge.from - 1] == 1 {
        // Sender keeps its surplus.
        let x = state.values().to_vec();
        let mut s = state.surpluses().to_vec();
        s[edge.from - 1] = 1;
        *state = QaState::with_surplus(x, s);
    }
    Ok(fired)
}

fn mutations() -> Outcome {
    let leaky = Hooks { qa_step: leaky_step, ..Hooks::default() };
    let rep = verify_suite_with(VerifyDepth::Small, SEED, &leaky);
    let caught_rule = rep.get("qa_state_invariants").is_some_and(|c| !c.passed);
    let swapped = Hooks {
        symmetric_closed_form: |w, z| {
            let mut r = w.rates().to_vec();
            r.reverse();
            qgossip::markov::SymmetricWalk::from_rates(r)?.closed_form(z)
        },
        ..Hooks::default()
    };
    let rep2 = verify_suite_with(VerifyDepth::Small, SEED, &swapped);
    let caught_formula = rep2.get("oracle_symmetric_walk").is_some_and(|c| !c.passed);
    let clean = verify_suite_with(VerifyDepth::Small, SEED, &Hooks::default()).all_passed();
    Ok((
        caught_rule && caught_formula && clean,
        format!("clean suite {clean}, leaky surplus caught {caught_rule}, swapped rates caught {caught_formula}"),
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |label: &str, out: Outcome| {
        let (ok, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("{} {label}: {detail}", if ok { "PASS" } else { "FAIL" });
    };
    report("criterion 1 (closed forms vs solver)", criterion_1());
    report("criterion 2 (worked ladder, exact)", criterion_2());
    report("criterion 3 (consensus exact means)", criterion_3());
    report("criterion 4 (consensus bound and scaling)", criterion_4());
    report("criterion 5 (averaging n=2 exact mean)", criterion_5());
    report("criterion 6 (averaging bound dominance)", criterion_6());
    match criteria_7_8() {
        Ok([c7, c8]) => {
            report("criterion 7 (conservation and surplus invariants)", Ok(c7));
            report("criterion 8 (Lyapunov suite)", Ok(c8));
        }
        Err(e) => {
            report("criterion 7 (conservation and surplus invariants)", Err(e.clone()));
            report("criterion 8 (Lyapunov suite)", Err(e));
        }
    }
    report("criterion 9 (consensus transition frequencies)", criterion_9());
    report("criterion 10 (bound regression)", criterion_10());
    report("self-check mutations", mutations());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} failing");
        ExitCode::FAILURE
    }
}
