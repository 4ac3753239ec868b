use crate::error::{Error, Result};
use crate::kernels::SeparableKernel;
use crate::model::ModelVector;
use crate::subsolve::{kkt_residual_parts, SubSolution};
use crate::Scalar;

/// Forward–backward step `y = prox_{h/L}(x − ∇f(x)/L)` for `g(a, z) = a + h(z)`
/// with `α = (L, 0, …, 0)`; `ν = (1, L(x − ∇f(x)/L − y))`.
pub fn solve_fb_subproblem<T: Scalar>(
    mv: &ModelVector<T>,
    kernel: &SeparableKernel<T>,
) -> Result<SubSolution<T>> {
    let n = kernel.dim;
    if mv.len() != 1 + n || mv.dim() != n {
        return Err(Error::ArityMismatch {
            expected: 1 + n,
            got: mv.len(),
        });
    }
    let l = mv.alpha[0];
    if !(l > T::zero()) {
        return Err(Error::UnboundedSubproblem);
    }
    if mv.alpha[1..].iter().any(|&a| a != T::zero()) {
        return Err(Error::InvalidProblem(
            "identity block of a separable kernel must carry zero curvature".into(),
        ));
    }
    let x = &mv.base;
    let g = &mv.jacobian[0];
    let v: Vec<T> = x.iter().zip(g).map(|(&xi, &gi)| xi - gi / l).collect();
    let y = kernel.prox.prox(&v, T::one() / l);
    let mut multiplier = Vec::with_capacity(1 + n);
    multiplier.push(T::one());
    multiplier.extend(v.iter().zip(&y).map(|(&vi, &yi)| l * (vi - yi)));
    let value = mv.eval(&y)[0] + kernel.prox.value(&y).value();
    let kkt = kkt_residual_parts(mv, &y, &multiplier, None);
    Ok(SubSolution {
        y,
        value,
        multiplier,
        kkt_residual: kkt,
        duality_gap: T::zero(),
        inner_iterations: 0,
        dual_history: Vec::new(),
    })
}
