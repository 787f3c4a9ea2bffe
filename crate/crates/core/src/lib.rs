//! Quantized gossip on digraphs.
//!
//! Two integer-valued protocols driven by random edge activations:
//! quantized consensus ([`qc`]), which drives every node to a common value,
//! and quantized averaging with binary surpluses ([`qa`]), which drives every
//! node to the floor or ceiling of the initial average. Around them:
//!
//! * [`graph`]: digraphs, activation models and edge sampling;
//! * [`lyapunov`]: the surplus counters and `V = D + S₊ - S₋`;
//! * [`markov`]: mean hitting times by linear solve and by closed form;
//! * [`bounds`]: mean convergence-time bounds on complete digraphs;
//! * [`experiments`]: seeded Monte Carlo ensembles, sweeps and audits;
//! * [`verify`]: a self-check suite over all of the above.
//!
//! Analytic code is generic over [`Scalar`]; the aliases below fix the
//! common instantiations.

pub mod bounds;
pub mod experiments;
pub mod graph;
pub mod init;
pub mod lyapunov;
pub mod markov;
pub mod qa;
pub mod qc;
pub mod scalar;
pub mod verify;

pub use num_rational::BigRational;

pub use bounds::{
    decrement_budgets, qa_convergence_bound, qa_decrement_bound, qa_max_decay_bound, qc_convergence_bound,
    qc_shrink_bound, BoundReport, BoundsError, DecrementBudgets,
};
pub use experiments::{
    level_set_membership, loglog_slope, run_ensemble, sweep, Algorithm, Experiment, ExperimentConfig,
    ExperimentError, StepAccumulator, SummaryRow, TrialStats,
};
pub use graph::{
    complete_digraph, path_digraph, ring_digraph, uniform_activation, ActivationModel, Digraph, Edge, GraphError,
    Network,
};
pub use init::{qa_worst_init, qc_worst_init, InitSpec};
pub use lyapunov::{check_structure, decompose_sum, init_tracker, v_upper_bound, LyapunovError, LyapunovState};
pub use markov::{solve_hitting_times, ChainSpec, MarkovError, NamedChain};
pub use qa::{qa_step, run_qa, QaError, QaRule, QaState};
pub use qc::{qc_step, run_qc, QcError, QcPolicy, QcState};
pub use scalar::Scalar;
pub use verify::{verify_suite, VerifyDepth, VerifyReport};

/// Exact arithmetic backend.
pub type Exact = BigRational;

pub type ChainSpecF64 = ChainSpec<f64>;
pub type ExactChainSpec = ChainSpec<Exact>;
pub type BoundReportF64 = BoundReport<f64>;
pub type ExactBoundReport = BoundReport<Exact>;
