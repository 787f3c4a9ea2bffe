mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use qgossip::experiments::{loglog_slope, Experiment, SummaryRow, DEFAULT_TRIALS};
use qgossip::markov::{parse_chain_matrix, BuiltChain};
use qgossip::qc::PolicyKind;
use qgossip::{
    sweep, verify_suite, Algorithm, BoundReport, ChainSpec, Exact, ExperimentConfig, ExperimentError, InitSpec,
    MarkovError, NamedChain, Scalar, VerifyDepth,
};

use output::{emit, fixed, fixed_opt, int_opt, Format, Report};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<MarkovError> for CliError {
    fn from(e: MarkovError) -> Self {
        match e {
            MarkovError::Unreachable(_) | MarkovError::Singular => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult = Result<ExitCode, CliError>;

/// Simulator and analytics for quantized gossip consensus and averaging.
#[derive(Debug, Parser)]
#[command(name = "qgossip", version)]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo ensemble and report convergence-time statistics.
    Simulate(SimulateArgs),
    /// Mean hitting times of a named chain or a matrix file.
    HittingTime(HittingArgs),
    /// Convergence-time bounds for complete digraphs.
    Bounds(BoundsArgs),
    /// Worst-case ensembles over a range of sizes.
    Sweep(SweepArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgArg {
    Qc,
    Qa,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::Qc => Algorithm::Qc,
            AlgArg::Qa => Algorithm::Qa,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Adopt,
    Step,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DepthArg {
    Small,
    Full,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn write(&self, report: &Report, default: Format) -> Result<(), CliError> {
        let text = report.render(self.format.unwrap_or(default))?;
        emit(&text, self.output.as_deref())?;
        Ok(())
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    alg: Option<AlgArg>,
    /// `complete:<n>`, `path:<n>`, `ring:<n>` or an edge-list file.
    #[arg(long)]
    graph: Option<String>,
    /// Explicit vector (`2,0`), `x1:<n>:<z>`, `halfsplit:<n>`, `qaworst:<n>`
    /// or `uniform:<n>:<lo>:<hi>:<seed>`.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Track the Lyapunov counters (averaging only).
    #[arg(long)]
    tracker: bool,
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the per-step Lyapunov trace of trial 0 instead of statistics.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct HittingArgs {
    /// `chain-i:<n>`, `chain-iii-l1:<n>`, `chain-iii-lgeq2:<n>`,
    /// `chain-ii-qa:<n>:<R>`, or a matrix file.
    chain: String,
    /// Exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    m: i64,
    #[arg(long = "M", allow_negative_numbers = true)]
    big_m: i64,
    #[arg(long = "R", default_value_t = 0)]
    r: i64,
    /// Exact rational values.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    alg: AlgArg,
    /// Ascending sizes, comma separated.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "small")]
    depth: DepthArg,
    #[arg(long, required = true)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .init();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::HittingTime(a) => hitting_time(a),
        Command::Bounds(a) => bounds(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Verify(a) => verify(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.code())
    })
}

fn simulate_config(a: &SimulateArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
        }
        None => {
            let missing = |flag: &str| CliError::Usage(format!("--{flag} is required without --config"));
            let alg = a.alg.ok_or_else(|| missing("alg"))?;
            let graph = a.graph.clone().ok_or_else(|| missing("graph"))?;
            let init = a.init.as_deref().ok_or_else(|| missing("init"))?;
            let init = init.parse::<InitSpec>().map_err(|e| CliError::Usage(e.to_string()))?;
            ExperimentConfig::new(alg.into(), graph, init)
        }
    };
    if a.config.is_some() {
        if let Some(alg) = a.alg {
            cfg.algorithm = alg.into();
        }
        if let Some(g) = &a.graph {
            cfg.graph = g.clone();
        }
        if let Some(init) = &a.init {
            cfg.init = init.parse().map_err(|e: qgossip::init::InitError| CliError::Usage(e.to_string()))?;
        }
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(k) = a.max_steps {
        cfg.max_steps = Some(k);
    }
    if let Some(p) = a.policy {
        cfg.policy = match p {
            PolicyArg::Adopt => PolicyKind::Adopt,
            PolicyArg::Step => PolicyKind::Step,
        };
    }
    cfg.tracker |= a.tracker;
    Ok(cfg)
}

const SUMMARY_HEADERS: [&str; 10] = ["algorithm", "n", "trials", "seed", "mean", "se", "min", "max", "failures", "bound"];

fn summary_report(rows: &[SummaryRow]) -> Report {
    Report {
        headers: SUMMARY_HEADERS.to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.algorithm.to_string(),
                    r.n.to_string(),
                    r.trials.to_string(),
                    r.seed.to_string(),
                    fixed(r.mean),
                    fixed(r.se),
                    int_opt(r.min),
                    int_opt(r.max),
                    r.failures.to_string(),
                    fixed_opt(r.bound),
                ]
            })
            .collect(),
        json: serde_json::to_value(rows).expect("summary rows serialize"),
        notes: Vec::new(),
    }
}

fn simulate(a: SimulateArgs) -> CliResult {
    let cfg = simulate_config(&a)?;
    let exp = Experiment::prepare(&cfg)?;
    if a.trace {
        let rows = exp.trace(0)?;
        let report = Report {
            headers: vec!["k", "rule", "D", "S_plus", "S_minus", "V"],
            rows: rows
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        r.rule.clone(),
                        r.d.to_string(),
                        r.s_plus.to_string(),
                        r.s_minus.to_string(),
                        r.v.to_string(),
                    ]
                })
                .collect(),
            json: serde_json::to_value(&rows).expect("trace rows serialize"),
            notes: Vec::new(),
        };
        a.out.write(&report, Format::Csv)?;
        return Ok(ExitCode::SUCCESS);
    }
    let t0 = Instant::now();
    let stats = exp.run()?;
    log::info!("{} trials in {:.2}s", stats.trials, t0.elapsed().as_secs_f64());
    let row = SummaryRow::new(&exp, &stats);
    a.out.write(&summary_report(std::slice::from_ref(&row)), Format::Csv)?;
    if stats.failures > 0 {
        return Err(CliError::Runtime(format!(
            "{} of {} trials did not converge within {} steps",
            stats.failures,
            stats.trials,
            exp.max_steps()
        )));
    }
    Ok(ExitCode::SUCCESS)
}

fn show<T: Scalar>(v: &T) -> String {
    if T::is_exact() {
        v.to_string()
    } else {
        fixed(v.to_f64_lossy())
    }
}

fn show_json<T: Scalar>(v: &T) -> Value {
    if T::is_exact() {
        Value::String(v.to_string())
    } else {
        json!(v.to_f64_lossy())
    }
}

/// Per-state solver value with an optional closed-form value or bound.
struct HitRow<T> {
    state: String,
    solver: T,
    closed_form: Option<T>,
    bound: Option<T>,
}

fn hitting_rows<T: Scalar>(spec: &str) -> Result<(Vec<HitRow<T>>, bool), CliError> {
    let (chain, built): (ChainSpec<T>, Option<BuiltChain<T>>) = match NamedChain::parse(spec) {
        Ok(named) => {
            let built = named.build::<T>()?;
            (built.to_chain(), Some(built))
        }
        Err(_) if Path::new(spec).is_file() => {
            let text = fs::read_to_string(spec)?;
            (parse_chain_matrix::<T>(&text)?, None)
        }
        Err(e) => return Err(CliError::Usage(format!("{e}; not a readable matrix file either"))),
    };
    let e = qgossip::solve_hitting_times(&chain)?;
    let mut rows: Vec<HitRow<T>> = chain
        .labels()
        .iter()
        .zip(&e)
        .map(|(l, v)| HitRow { state: l.clone(), solver: v.clone(), closed_form: None, bound: None })
        .collect();
    let named = built.is_some();
    match built {
        Some(BuiltChain::Symmetric(w)) => {
            for z in 1..w.n() {
                rows[z].closed_form = Some(w.closed_form(z)?);
            }
        }
        Some(BuiltChain::Reflected(w)) => {
            for z in 1..w.n() {
                rows[z - 1].closed_form = Some(w.closed_form(z)?);
            }
        }
        Some(BuiltChain::Ladder(w)) => {
            let last = w.n() - 1;
            let cf = w.closed_form()?;
            rows[w.state_index(last, true)].closed_form = Some(cf.upper_exact);
            rows[w.state_index(last, false)].bound = Some(cf.lower_bound);
        }
        None => {}
    }
    Ok((rows, named))
}

fn hitting_report<T: Scalar>(spec: &str) -> Result<Report, CliError> {
    let (rows, named) = hitting_rows::<T>(spec)?;
    let diff = |r: &HitRow<T>| r.closed_form.as_ref().map(|c| (c.clone() - r.solver.clone()).abs());
    let worst = rows.iter().filter_map(diff).fold(T::zero(), |a, d| if d > a { d } else { a });
    let opt = |v: Option<T>| v.as_ref().map(show).unwrap_or_default();
    let opt_json = |v: Option<T>| v.as_ref().map(show_json).unwrap_or(Value::Null);
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("state".into(), json!(r.state));
            m.insert("solver".into(), show_json(&r.solver));
            m.insert("closed_form".into(), opt_json(r.closed_form.clone()));
            m.insert("abs_diff".into(), opt_json(diff(r)));
            m.insert("bound".into(), opt_json(r.bound.clone()));
            Value::Object(m)
        })
        .collect();
    let mut notes = Vec::new();
    if named {
        notes.push(format!("max |closed form - solver| = {}", show(&worst)));
    }
    Ok(Report {
        headers: vec!["state", "solver", "closed_form", "abs_diff", "bound"],
        rows: rows
            .iter()
            .map(|r| vec![r.state.clone(), show(&r.solver), opt(r.closed_form.clone()), opt(diff(r)), opt(r.bound.clone())])
            .collect(),
        json: json!({ "chain": spec, "states": json_rows }),
        notes,
    })
}

fn hitting_time(a: HittingArgs) -> CliResult {
    let report = if a.exact { hitting_report::<Exact>(&a.chain)? } else { hitting_report::<f64>(&a.chain)? };
    a.out.write(&report, Format::Table)?;
    Ok(ExitCode::SUCCESS)
}

fn bounds_report<T: Scalar>(a: &BoundsArgs) -> Result<Report, CliError> {
    let rep = BoundReport::<T>::new(a.n, a.m, a.big_m, a.r).map_err(|e| CliError::Usage(e.to_string()))?;
    let entries: Vec<(&str, Option<String>, Value)> = vec![
        ("qc_convergence", Some(show(&rep.qc_convergence)), show_json(&rep.qc_convergence)),
        ("qc_shrink", Some(show(&rep.qc_shrink)), show_json(&rep.qc_shrink)),
        ("qa_convergence", Some(show(&rep.qa_convergence)), show_json(&rep.qa_convergence)),
        ("lyapunov_max", Some(show(&rep.lyapunov_max)), show_json(&rep.lyapunov_max)),
        ("qa_decrement", Some(show(&rep.qa_decrement)), show_json(&rep.qa_decrement)),
        (
            "qa_max_decay",
            rep.qa_max_decay.as_ref().map(show),
            rep.qa_max_decay.as_ref().map(show_json).unwrap_or(Value::Null),
        ),
        ("v_decrements", Some(rep.v_decrements.to_string()), json!(rep.v_decrements)),
        (
            "max_state_decrements",
            rep.max_state_decrements.map(|k| k.to_string()),
            json!(rep.max_state_decrements),
        ),
    ];
    let mut obj = Map::new();
    obj.insert("n".into(), json!(a.n));
    obj.insert("m".into(), json!(a.m));
    obj.insert("M".into(), json!(a.big_m));
    obj.insert("R".into(), json!(a.r));
    for (k, _, v) in &entries {
        obj.insert((*k).into(), v.clone());
    }
    Ok(Report {
        headers: vec!["quantity", "value"],
        rows: entries.into_iter().map(|(k, s, _)| vec![k.to_string(), s.unwrap_or_default()]).collect(),
        json: Value::Object(obj),
        notes: Vec::new(),
    })
}

fn bounds(a: BoundsArgs) -> CliResult {
    let report = if a.exact { bounds_report::<Exact>(&a)? } else { bounds_report::<f64>(&a)? };
    a.out.write(&report, Format::Table)?;
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(a: SweepArgs) -> CliResult {
    let rows = sweep(a.alg.into(), &a.sizes, a.trials, a.seed)?;
    let mut report = summary_report(&rows);
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mean)).collect();
    if let Some(slope) = loglog_slope(&pts) {
        report.notes.push(format!("log-log slope of mean vs n: {slope:.3}"));
    }
    a.out.write(&report, Format::Csv)?;
    let failures: u64 = rows.iter().map(|r| r.failures).sum();
    if failures > 0 {
        return Err(CliError::Runtime(format!("{failures} trials did not converge")));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> CliResult {
    let depth = match a.depth {
        DepthArg::Small => VerifyDepth::Small,
        DepthArg::Full => VerifyDepth::Full,
    };
    let report = verify_suite(depth, a.seed);
    let out = Report {
        headers: vec!["status", "check", "seconds", "detail"],
        rows: report
            .checks
            .iter()
            .map(|c| {
                vec![
                    if c.passed { "PASS" } else { "FAIL" }.to_string(),
                    c.name.to_string(),
                    format!("{:.2}", c.seconds),
                    c.detail.clone(),
                ]
            })
            .collect(),
        json: serde_json::to_value(&report).expect("verify report serializes"),
        notes: Vec::new(),
    };
    a.out.write(&out, Format::Table)?;
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for c in report.failing() {
            eprintln!("failed check: {}", c.name);
        }
        Ok(ExitCode::from(1))
    }
}
