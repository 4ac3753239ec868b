//! Problem files, trace files and the `solve` / `bench` / `verify`
//! commands behind the `multiprox` binary.

mod commands;
mod problem;
mod trace;

pub use commands::{cmd_bench, cmd_solve, cmd_verify, BenchOptions, BenchOutcome, ModeArg, SolveOptions, SolveOutcome};
pub use problem::{ComponentSpec, KernelSpec, ProblemFile, ProxSpec};
pub use trace::{sidecar_path, Certificates, RunLabel, Sidecar, TraceFile, TraceRow};

use multiprox::diagnostics::InvariantViolation;
use multiprox_bench::BenchError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse input: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("starting point is outside the domain of the objective")]
    InfeasibleStart,
    #[error("solver failed: {0}")]
    Solver(multiprox::Error),
    #[error("benchmark failed: {0}")]
    Bench(String),
    #[error("every benchmark cell failed")]
    AllCellsFailed,
    #[error("trace does not match: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Invalid(_) => 2,
            CliError::InfeasibleStart => 3,
            CliError::Solver(_) | CliError::Bench(_) | CliError::AllCellsFailed => 4,
            CliError::Mismatch(_) => 5,
            CliError::Invariant(_) => 6,
            CliError::Output(_) => 1,
        }
    }
}

/// Sorts core errors into input problems, infeasible starts and solver
/// failures.
pub fn classify(e: multiprox::Error) -> CliError {
    use multiprox::Error as E;
    match e {
        E::InfeasibleStart => CliError::InfeasibleStart,
        E::InvalidProblem(_)
        | E::InvalidConfig(_)
        | E::ArityMismatch { .. }
        | E::DimensionMismatch { .. }
        | E::MissingCurvature
        | E::SlaterViolation { .. }
        | E::Empty(_) => CliError::Invalid(e.to_string()),
        other => CliError::Solver(other),
    }
}

fn classify_bench(e: BenchError) -> CliError {
    match e {
        BenchError::Solver(e) => classify(e),
        BenchError::InvalidDimensions { .. } | BenchError::InvalidScale(_) => CliError::Invalid(e.to_string()),
        other => CliError::Bench(other.to_string()),
    }
}
