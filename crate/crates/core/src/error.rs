use thiserror::Error;

/// Errors raised by model evaluation, subproblem solvers, outer loops and
/// certificate evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component {component} evaluated to a non-finite value")]
    NonFinite { component: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("point lies outside the domain of the outer kernel")]
    DomainViolation,

    #[error("starting point is not in the domain of g∘F")]
    InfeasibleStart,

    #[error("subproblem has no minimizer (model is unbounded below)")]
    UnboundedSubproblem,

    #[error("subproblem constraint set is empty")]
    InfeasibleSubproblem,

    #[error("inner solver did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("backtracking loop exceeded {inflations} inflations at iteration {iteration}")]
    WhileLoopDivergence { iteration: usize, inflations: usize },

    #[error("subproblem failed at outer iteration {iteration}: {source}")]
    Subproblem {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no point maps into the interior of the kernel domain (margin {margin:e})")]
    SlaterViolation { margin: f64 },

    #[error("kernel domain has no boundary; use the full-domain bound instead")]
    NoBoundary,

    #[error("curvature constants are not declared for every component")]
    MissingCurvature,

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
