use crate::error::{Error, Result};
use crate::kernels::NlpKernel;
use crate::linalg::{dot, max_abs, norm, norm_sq};
use crate::model::ModelVector;
use crate::prox::ProxFriendly;
use crate::subsolve::dual::{maximize, Cone, DualEval, DualOracle};
use crate::subsolve::max::solve_max_parts;
use crate::subsolve::{kkt_residual_parts, SubSolution, SubsolveOptions};
use crate::Scalar;

/// Lagrangian dual of
/// `min a₀ + g₀ᵀd + (α₀/2)‖d‖² + h(x + d)  s.t.  a_i + g_iᵀd + (α_i/2)‖d‖² ≤ 0`
/// over `μ ≥ 0`. For fixed `μ` the inner minimizer is one prox evaluation:
/// `y(μ) = prox_{h/A}(x − (g₀ + Gμ)/A)` with `A = α₀ + αᵀμ`.
struct NlpDual<'a, T> {
    x: &'a [T],
    a0: T,
    g0: &'a [T],
    alpha0: T,
    a: &'a [T],
    rows: &'a [Vec<T>],
    alpha: &'a [T],
    prox: ProxFriendly<T>,
}

struct Inner<T> {
    curv: T,
    v: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
    dd: T,
    objective: T,
    constraints: Vec<T>,
}

impl<T: Scalar> NlpDual<'_, T> {
    fn inner(&self, mu: &[T]) -> Option<Inner<T>> {
        let curv = self.alpha0 + dot(self.alpha, mu);
        if !(curv > T::zero()) {
            return None;
        }
        let mut c = self.g0.to_vec();
        for (row, &w) in self.rows.iter().zip(mu) {
            if w != T::zero() {
                crate::linalg::axpy(w, row, &mut c);
            }
        }
        let v: Vec<T> = self.x.iter().zip(&c).map(|(&xi, &ci)| xi - ci / curv).collect();
        let y = self.prox.prox(&v, T::one() / curv);
        let d: Vec<T> = y.iter().zip(self.x).map(|(&yi, &xi)| yi - xi).collect();
        let dd = norm_sq(&d);
        let half = T::lit(0.5);
        let h = self.prox.value(&y).value();
        let objective = self.a0 + dot(self.g0, &d) + half * self.alpha0 * dd + h;
        let constraints = (0..self.a.len())
            .map(|i| self.a[i] + dot(&self.rows[i], &d) + half * self.alpha[i] * dd)
            .collect();
        Some(Inner {
            curv,
            v,
            y,
            d,
            dd,
            objective,
            constraints,
        })
    }
}

impl<T: Scalar> DualOracle<T> for NlpDual<'_, T> {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn cone(&self) -> Cone {
        Cone::Orthant
    }

    fn evaluate(&self, mu: &[T]) -> DualEval<T> {
        let m = self.dim();
        let Some(inner) = self.inner(mu) else {
            return DualEval::unbounded(m);
        };
        let value = inner.objective + dot(mu, &inner.constraints);
        let mask = self.prox.prox_free_mask(&inner.v, T::one() / inner.curv);
        // w_i = ∇_y H_i restricted to the coordinates where the prox moves
        let w: Vec<Vec<T>> = (0..m)
            .map(|i| {
                self.rows[i]
                    .iter()
                    .zip(&inner.d)
                    .zip(&mask)
                    .map(|((&g, &dk), &free)| if free { g + self.alpha[i] * dk } else { T::zero() })
                    .collect()
            })
            .collect();
        let mut hessian = vec![T::zero(); m * m];
        for i in 0..m {
            for j in i..m {
                let v = -dot(&w[i], &w[j]) / inner.curv;
                hessian[i * m + j] = v;
                hessian[j * m + i] = v;
            }
        }
        DualEval {
            value,
            grad: inner.constraints,
            hessian,
        }
    }

    fn residual(&self, mu: &[T], eval: &DualEval<T>) -> T {
        let infeas = eval.grad.iter().fold(T::zero(), |acc, &h| acc.max(h));
        let compl = mu
            .iter()
            .zip(&eval.grad)
            .fold(T::zero(), |acc, (&u, &h)| acc + (u * h).abs());
        infeas.max(compl)
    }
}

fn check_identity_block<T: Scalar>(mv: &ModelVector<T>, start: usize, len: usize) -> Result<()> {
    let tol = T::lit(1e-12);
    for j in 0..len {
        let row = &mv.jacobian[start + j];
        let ok = row
            .iter()
            .enumerate()
            .all(|(k, &v)| (v - if k == j { T::one() } else { T::zero() }).abs() <= tol)
            && (mv.values[start + j] - mv.base[j]).abs() <= tol * (T::one() + mv.base[j].abs())
            && mv.alpha[start + j] == T::zero();
        if !ok {
            return Err(Error::InvalidProblem(format!(
                "component {} is not the identity coordinate {j} with zero curvature",
                start + j
            )));
        }
    }
    Ok(())
}

/// Largest `t ∈ [0, 1]` with `a + t·b + t²·c ≤ 0`, given `a ≤ 0`, `c ≥ 0`.
fn feasible_fraction<T: Scalar>(a: T, b: T, c: T) -> T {
    if a + b + c <= T::zero() {
        return T::one();
    }
    let t = if c > T::zero() {
        let disc = (b * b - T::lit(4.0) * a * c).max(T::zero());
        // root of the convex quadratic to the right of 0, in the stable form
        let q = -(b + disc.sqrt()) / T::lit(2.0);
        if q != T::zero() {
            a / q
        } else {
            T::zero()
        }
    } else if b > T::zero() {
        -a / b
    } else {
        T::one()
    };
    t.max(T::zero()).min(T::one())
}

/// Moving-balls style subproblem for the NLP kernel: linearized objective
/// plus `(α₀/2)‖y − x‖² + h(y)` under the ball/halfspace model constraints.
///
/// Returns `ν = (1, μ₁…μ_m, ν_h)` with `ν_h ∈ ∂h(y)` when the kernel
/// carries a prox block.
pub fn solve_nlp_subproblem<T: Scalar>(
    mv: &ModelVector<T>,
    kernel: &NlpKernel<T>,
    opts: &SubsolveOptions<T>,
) -> Result<SubSolution<T>> {
    let m = kernel.constraints;
    let arity = 1 + m + kernel.prox_dim;
    if mv.len() != arity {
        return Err(Error::ArityMismatch {
            expected: arity,
            got: mv.len(),
        });
    }
    if kernel.prox_dim > 0 {
        check_identity_block(mv, 1 + m, kernel.prox_dim)?;
    }
    let x = &mv.base;
    let a = &mv.values[1..1 + m];
    let rows = &mv.jacobian[1..1 + m];
    let alpha = &mv.alpha[1..1 + m];
    let alpha0 = mv.alpha[0];

    if alpha0 == T::zero() && alpha.iter().all(|&v| v == T::zero()) {
        return Err(Error::UnboundedSubproblem);
    }

    let grad_scale = mv.jacobian[..1 + m]
        .iter()
        .map(|r| norm(r))
        .fold(T::zero(), T::max);
    let scale = T::one().max(max_abs(&mv.values[..1 + m])).max(grad_scale);
    let tol = opts.tolerance * scale;

    // an infeasible base point may still have a nonempty model set; decide
    // by minimizing the max of the constraint models
    if a.iter().any(|&v| v > T::zero()) {
        match solve_max_parts(x, a, rows, alpha, opts) {
            Ok(sol) if sol.value > tol => return Err(Error::InfeasibleSubproblem),
            Ok(_) | Err(Error::UnboundedSubproblem) => {}
            Err(e) => return Err(e),
        }
    }

    let oracle = NlpDual {
        x,
        a0: mv.values[0],
        g0: &mv.jacobian[0],
        alpha0,
        a,
        rows,
        alpha,
        prox: kernel.prox,
    };
    let init: Vec<T> = if alpha0 > T::zero() {
        vec![T::zero(); m]
    } else {
        alpha
            .iter()
            .map(|&v| if v > T::zero() { T::one() } else { T::zero() })
            .collect()
    };
    let out = maximize(&oracle, init, tol, opts.max_iterations);
    if !out.eval.value.is_finite() {
        return Err(Error::UnboundedSubproblem);
    }
    if !out.converged {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            residual: out.residual.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    let mu = out.nu;
    let inner = oracle.inner(&mu).ok_or(Error::UnboundedSubproblem)?;
    let prox_mult: Vec<T> = inner
        .v
        .iter()
        .zip(&inner.y)
        .map(|(&vi, &yi)| inner.curv * (vi - yi))
        .collect();

    // pull y back along the segment from x when rounding left a model
    // constraint marginally positive (x itself satisfies every model)
    let half = T::lit(0.5);
    let mut t = T::one();
    if a.iter().all(|&v| v <= T::zero()) {
        for i in 0..m {
            if inner.constraints[i] > T::zero() {
                let b = dot(&rows[i], &inner.d);
                let c = half * alpha[i] * inner.dd;
                t = t.min(feasible_fraction(a[i], b, c));
            }
        }
    }
    let y: Vec<T> = if t < T::one() {
        x.iter().zip(&inner.d).map(|(&xi, &di)| xi + t * di).collect()
    } else {
        inner.y.clone()
    };

    let mut multiplier = Vec::with_capacity(arity);
    multiplier.push(T::one());
    multiplier.extend_from_slice(&mu);
    if kernel.prox_dim > 0 {
        multiplier.extend_from_slice(&prox_mult);
    }

    let model = mv.eval(&y);
    let value = model[0] + kernel.prox.value(&y).value();
    let gap = (value - out.eval.value).abs();
    let kkt = kkt_residual_parts(mv, &y, &multiplier, Some(1..1 + m));
    Ok(SubSolution {
        y,
        value,
        multiplier,
        kkt_residual: kkt,
        duality_gap: gap,
        inner_iterations: out.iterations,
        dual_history: out.history,
    })
}

#[cfg(test)]
mod tests {
    use super::feasible_fraction;

    #[test]
    fn feasible_fraction_roots() {
        // −1 + t² ≤ 0 holds on all of [0, 1]
        assert_eq!(feasible_fraction(-1.0, 0.0, 1.0), 1.0);
        // −1 + 4t² = 0 at t = ½
        assert!((feasible_fraction(-1.0_f64, 0.0, 4.0) - 0.5).abs() < 1e-15);
        // −1 + 2t = 0 at t = ½
        assert!((feasible_fraction(-1.0_f64, 2.0, 0.0) - 0.5).abs() < 1e-15);
        // already tight at 0
        assert_eq!(feasible_fraction(0.0, 1.0, 1.0), 0.0);
    }
}
