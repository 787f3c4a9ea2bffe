use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn qgossip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgossip")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(out)))
}

#[test]
fn simulate_csv_is_deterministic() {
    let args = ["simulate", "--alg", "qc", "--graph", "complete:8", "--init", "halfsplit:8", "--trials", "2000", "--seed", "7"];
    let a = qgossip(&args);
    let b = qgossip(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("algorithm,n,trials,seed,mean,se,min,max,failures,bound"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..4], &["qc", "8", "2000", "7"]);
    let mean: f64 = row[4].parse().unwrap();
    assert!(mean < 56.0);
    assert_eq!(row[4].split('.').nth(1).unwrap().len(), 9);
}

#[test]
fn simulate_two_node_average() {
    let out = qgossip(&[
        "simulate", "--alg", "qa", "--graph", "complete:2", "--init", "2,0", "--trials", "20000", "--seed", "1", "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json(&out)[0];
    let (mean, se) = (v["mean"].as_f64().unwrap(), v["se"].as_f64().unwrap());
    assert!((mean - 4.0).abs() < 3.0 * se, "{mean} ± {se}");
    for key in ["algorithm", "n", "trials", "seed", "min", "max", "failures", "bound"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn averaging_on_path_is_a_usage_error() {
    let out = qgossip(&["simulate", "--alg", "qa", "--graph", "path:3", "--init", "2,0,1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("complete"));
}

#[test]
fn bad_specs_are_usage_errors() {
    for args in [
        ["simulate", "--alg", "qc", "--graph", "cube:3", "--init", "1,0,0"],
        ["simulate", "--alg", "qc", "--graph", "complete:3", "--init", "x1:3:5"],
        ["simulate", "--alg", "qc", "--graph", "complete:3", "--init", "1,0"],
    ] {
        assert_eq!(qgossip(&args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(qgossip(&["simulate", "--bogus"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    let out = qgossip(&[
        "simulate", "--alg", "qa", "--graph", "complete:3", "--init", "2,0,0", "--seed", "1", "--max-steps", "1", "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    fs::write(&path, r#"{"algorithm":"qc","graph":"complete:5","init":"x1:5:2","trials":300,"seed":3}"#).unwrap();
    let out = qgossip(&["simulate", "--config", path.to_str().unwrap(), "--trials", "50", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = &json(&out)[0];
    assert_eq!(v["trials"], 50);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["n"], 5);

    fs::write(&path, r#"{"algorithm":"qc","graph":"complete:5","init":"x1:5:2","colour":1}"#).unwrap();
    assert_eq!(qgossip(&["simulate", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn trace_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = qgossip(&[
        "simulate", "--alg", "qa", "--graph", "complete:4", "--init", "qaworst:4", "--seed", "5", "--trace", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,rule,D,S_plus,S_minus,V"));
    assert_eq!(lines.next(), Some("0,init,2,0,0,2"));
    let v: Vec<i64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*v.last().unwrap(), 0);
}

#[test]
fn hitting_time_consensus_walk() {
    let out = qgossip(&["hitting-time", "chain-i:3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("state,solver,closed_form,abs_diff,bound\n"));
    assert!(text.contains("\n1,3.000000000,3.000000000,"));
    assert!(text.contains("\n2,3.000000000,3.000000000,"));

    let v = json(&qgossip(&["hitting-time", "chain-i:3", "--format", "json"]));
    for s in v["states"].as_array().unwrap() {
        if let Some(d) = s["abs_diff"].as_f64() {
            assert!(d < 1e-9);
        }
    }
}

#[test]
fn hitting_time_one_level_ladder_below_bound() {
    let v = json(&qgossip(&["hitting-time", "chain-iii-l1:6", "--format", "json"]));
    let states = v["states"].as_array().unwrap();
    let cf: Vec<f64> = states.iter().filter_map(|s| s["closed_form"].as_f64()).collect();
    assert!(!cf.is_empty() && cf.iter().all(|&c| c < 180.0));
    assert!(states.iter().any(|s| s["bound"].as_f64().is_some()));
}

#[test]
fn hitting_time_exact_rationals() {
    let out = qgossip(&["hitting-time", "chain-i:3", "--exact", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\n1,3,3,0,"));
}

#[test]
fn hitting_time_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    fs::write(&good, "states 3 target 2\n0.5 0.5 0\n0 0.5 0.5\n0 0 1\n").unwrap();
    let out = qgossip(&["hitting-time", good.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("\n0,4.000000000,"));

    let stuck = dir.path().join("stuck.txt");
    fs::write(&stuck, "states 3 target 2\n1 0 0\n0.5 0 0.5\n0 0 1\n").unwrap();
    let out = qgossip(&["hitting-time", stuck.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!stderr(&out).is_empty());

    assert_eq!(qgossip(&["hitting-time", "chain-iii-l1:3"]).status.code(), Some(2));
    assert_eq!(qgossip(&["hitting-time", "no-such-file"]).status.code(), Some(2));
}

#[test]
fn bounds_exact_values() {
    let v = json(&qgossip(&["bounds", "--n", "4", "--m", "0", "--M", "2", "--exact", "--format", "json"]));
    assert_eq!(v["qa_convergence"], "144");
    assert_eq!(v["qa_decrement"], "72");
    assert_eq!(v["qc_shrink"], "12");
    let v = json(&qgossip(&["bounds", "--n", "10", "--m", "0", "--M", "1", "--R", "4", "--format", "json"]));
    assert_eq!(v["qc_convergence"].as_f64(), Some(90.0));
    assert_eq!(v["qa_max_decay"].as_f64(), Some(45.0));
    let table = stdout(&qgossip(&["bounds", "--n", "3", "--m", "0", "--M", "1"]));
    assert!(table.lines().any(|l| l.contains("qc_shrink") && l.contains("6")));
    assert_eq!(qgossip(&["bounds", "--n", "1", "--m", "0", "--M", "1"]).status.code(), Some(2));
    assert_eq!(qgossip(&["bounds", "--n", "4", "--m", "3", "--M", "1"]).status.code(), Some(2));
}

#[test]
fn sweep_outputs() {
    let args = ["sweep", "--alg", "qc", "--n", "4,8", "--trials", "200", "--seed", "2"];
    let out = qgossip(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(out.stdout, qgossip(&args).stdout);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v = json(&qgossip(&json_args));
    assert!(v.to_string().contains("\"bound\""));
    assert_eq!(qgossip(&["sweep", "--alg", "qc", "--n", "8,4"]).status.code(), Some(2));
}

#[test]
fn verify_requires_seed_and_passes() {
    assert_eq!(qgossip(&["verify"]).status.code(), Some(2));
    let out = qgossip(&["verify", "--seed", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v = json(&out);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    assert!(checks.iter().all(|c| c["passed"] == true));
    let table = stdout(&qgossip(&["verify", "--seed", "1"]));
    assert!(!table.contains("FAIL"));
}
