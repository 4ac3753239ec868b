//! Structured solvers for the model subproblem `min_y g(H_α(x, y))`.

mod dual;
mod fb;
mod max;
mod nlp;
mod simplex;

use std::ops::Range;

use crate::error::Result;
use crate::kernels::OuterKernel;
use crate::linalg::{dot, norm};
use crate::model::ModelVector;
use crate::Scalar;

pub use fb::solve_fb_subproblem;
pub use max::solve_max_subproblem;
pub use nlp::solve_nlp_subproblem;
pub use simplex::project_simplex;

#[derive(Debug, Clone, PartialEq)]
pub struct SubSolution<T> {
    pub y: Vec<T>,
    /// `g(H_α(x, y))` at the returned point.
    pub value: T,
    /// Recovered multiplier `ν ∈ ∂g(H_α(x, y))` with `∇_y H_α(x, y)ᵀν ≈ 0`.
    pub multiplier: Vec<T>,
    pub kkt_residual: T,
    /// Primal value minus dual value at termination.
    pub duality_gap: T,
    pub inner_iterations: usize,
    /// Dual objective after every accepted inner step (empty for closed forms).
    pub dual_history: Vec<T>,
}

impl<T: Scalar> SubSolution<T> {
    /// `αᵀν`, the curvature weight the certificates are built from.
    pub fn curvature_weight(&self, alpha: &[T]) -> T {
        dot(alpha, &self.multiplier)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsolveOptions<T> {
    /// Relative stopping tolerance of the inner dual method.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for SubsolveOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-9),
            max_iterations: 10_000,
        }
    }
}

/// Dispatches on the kernel structure.
pub fn solve_subproblem<T: Scalar>(
    kernel: &OuterKernel<T>,
    mv: &ModelVector<T>,
    opts: &SubsolveOptions<T>,
) -> Result<SubSolution<T>> {
    if mv.len() != kernel.arity() {
        return Err(crate::Error::ArityMismatch {
            expected: kernel.arity(),
            got: mv.len(),
        });
    }
    match kernel {
        OuterKernel::Max(_) => solve_max_subproblem(mv, opts),
        OuterKernel::Nlp(k) => solve_nlp_subproblem(mv, k, opts),
        OuterKernel::Separable(k) => solve_fb_subproblem(mv, k),
    }
}

/// `‖∇F(x)ᵀν + (αᵀν)(y − x)‖`, plus complementarity `Σ|ν_i H_i|`, primal
/// infeasibility `Σ max(0, H_i)` and dual infeasibility `Σ max(0, −ν_i)`
/// over the inequality block when the kernel has one.
pub fn kkt_residual<T: Scalar>(
    kernel: &OuterKernel<T>,
    mv: &ModelVector<T>,
    y: &[T],
    nu: &[T],
) -> T {
    let block = kernel.constraint_block();
    let block = if block.is_empty() { None } else { Some(block) };
    kkt_residual_parts(mv, y, nu, block)
}

pub(crate) fn kkt_residual_parts<T: Scalar>(
    mv: &ModelVector<T>,
    y: &[T],
    nu: &[T],
    constraints: Option<Range<usize>>,
) -> T {
    let curv = dot(&mv.alpha, nu);
    let mut r: Vec<T> = y
        .iter()
        .zip(&mv.base)
        .map(|(&yi, &xi)| curv * (yi - xi))
        .collect();
    for (row, &w) in mv.jacobian.iter().zip(nu) {
        if w != T::zero() {
            crate::linalg::axpy(w, row, &mut r);
        }
    }
    let mut total = norm(&r);
    if let Some(block) = constraints {
        let h = mv.eval(y);
        for i in block {
            total += (nu[i] * h[i]).abs() + h[i].max(T::zero()) + (-nu[i]).max(T::zero());
        }
    }
    total
}
