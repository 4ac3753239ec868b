//! Multiproximal linearization for `min g(F(x))` with a convex,
//! coordinatewise nondecreasing outer kernel `g` and convex smooth
//! components `F = (f_1, …, f_m)`.
//!
//! Every step minimizes `g(H_α(x, ·))` where each component is replaced by
//! its linearization plus `(α_i/2)‖y − x‖²`. The crate is generic over the
//! scalar type; the aliases below fix it to `f64`.

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod prox;
mod scalar;
pub mod subsolve;

pub use driver::{
    fixed_point_check, multiprox_backtracking_run, multiprox_run, pgnm_run, run, Iteration, Mode,
    RunTrace, SolverConfig, Termination,
};
pub use error::{Error, Result};
pub use kernels::{KernelStructure, MaxKernel, NlpKernel, OuterKernel, SeparableKernel};
pub use model::{CompositeProblem, Extended, ModelVector, SmoothComponent, SmoothMap};
pub use prox::ProxFriendly;
pub use scalar::Scalar;
pub use subsolve::{solve_subproblem, SubSolution, SubsolveOptions};

pub type Component = SmoothComponent<f64>;
pub type Map = SmoothMap<f64>;
pub type Problem = CompositeProblem<f64>;
pub type Kernel = OuterKernel<f64>;
pub type Prox = ProxFriendly<f64>;
pub type Model = ModelVector<f64>;
pub type Solution = SubSolution<f64>;
pub type Config = SolverConfig<f64>;
pub type Trace = RunTrace<f64>;
