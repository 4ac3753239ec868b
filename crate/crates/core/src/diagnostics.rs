//! Certificates and bounds: online complexity constant, Lipschitz-based and
//! explicit Slater-based constants, multiplier bounds, signed distance to
//! the kernel domain boundary and the Fermat residual.

use crate::driver::RunTrace;
use crate::error::{Error, Result};
use crate::kernels::OuterKernel;
use crate::linalg::{dist, dot, norm, operator_norm};
use crate::model::{CompositeProblem, Extended};
use crate::prox::ProxFriendly;
use crate::subsolve::{solve_subproblem, SubsolveOptions};
use crate::Scalar;

const OP_NORM_ITERS: usize = 100;

fn op_norm_tol<T: Scalar>() -> T {
    T::lit(1e-10)
}

/// Running maximum of `α_jᵀν_j` for `j = 1..=k`, one entry per recorded
/// step.
pub fn online_constants<T: Scalar>(trace: &RunTrace<T>) -> Vec<T> {
    let mut best = T::zero();
    trace
        .multipliers()
        .into_iter()
        .map(|(alpha, nu)| {
            best = best.max(dot(alpha, nu));
            best
        })
        .collect()
}

/// `max_j α_jᵀν_j` over the whole trace.
pub fn online_constant<T: Scalar>(trace: &RunTrace<T>) -> Result<T> {
    online_constants(trace)
        .last()
        .copied()
        .ok_or(Error::Empty("trace has no recorded step"))
}

/// `L_g‖L‖`; `+∞` when `g` is not Lipschitz on its domain.
pub fn lipschitz_condition_bound<T: Scalar>(problem: &CompositeProblem<T>) -> Result<Extended<T>> {
    let l = problem.smooth().curvature_or_err()?;
    Ok(match problem.kernel().lipschitz() {
        Extended::Finite(lg) => Extended::Finite(lg * norm(&l)),
        Extended::PosInfinity => Extended::PosInfinity,
    })
}

/// Signed distance from `z` to the boundary of `dom g`: positive inside,
/// negative outside. Only constraint halflines and box faces contribute;
/// `NoBoundary` for kernels whose domain is all of `R^m`.
pub fn sdist<T: Scalar>(z: &[T], kernel: &OuterKernel<T>) -> Result<T> {
    if z.len() != kernel.arity() {
        return Err(Error::ArityMismatch {
            expected: kernel.arity(),
            got: z.len(),
        });
    }
    // each face is `s ≥ 0` with `s` an affine function of one coordinate
    let mut slacks: Vec<T> = kernel.constraint_block().map(|i| -z[i]).collect();
    if let (Some(block), Some(ProxFriendly::Box { lo, hi })) = (kernel.identity_block(), kernel.prox_term()) {
        for &v in &z[block] {
            if lo.is_finite() {
                slacks.push(v - *lo);
            }
            if hi.is_finite() {
                slacks.push(*hi - v);
            }
        }
    }
    if slacks.is_empty() {
        return Err(Error::NoBoundary);
    }
    let violation: T = slacks
        .iter()
        .map(|&s| {
            let v = (-s).max(T::zero());
            v * v
        })
        .fold(T::zero(), |a, b| a + b);
    if violation > T::zero() {
        // a box coordinate violates at most one of its two faces, so the
        // distance to the product set is the norm of the violations
        return Ok(-violation.sqrt());
    }
    Ok(slacks.iter().copied().fold(T::infinity(), T::min))
}

/// `dist[F(x̄), bd dom g]`, required positive.
pub fn slater_distance<T: Scalar>(problem: &CompositeProblem<T>, xbar: &[T]) -> Result<T> {
    let z = problem.eval_smooth(xbar)?;
    let d = sdist(&z, problem.kernel())?;
    if !(d > T::zero()) {
        return Err(Error::SlaterViolation {
            margin: d.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlaterCombination<T> {
    /// `w = x + γ(x̄, x)(x̄ − x)`.
    pub w: Vec<T>,
    pub gamma: T,
    /// Certified lower bound on `sdist[H_L(x, w), bd dom g]`.
    pub margin: T,
}

/// Convex combination of `x` and the Slater point `x̄` that is strictly
/// feasible for the model at `x`, with its certified margin
/// `s̄² / (4(s̄ + ‖L‖‖x − x̄‖²/2))`, `s̄ = sdist F(x̄)`.
pub fn slater_combination<T: Scalar>(
    problem: &CompositeProblem<T>,
    x: &[T],
    xbar: &[T],
) -> Result<SlaterCombination<T>> {
    let l = problem.smooth().curvature_or_err()?;
    let sbar = slater_distance(problem, xbar)?;
    let half = T::lit(0.5);
    let r2 = dist(x, xbar).powi(2);
    let fbar = problem.eval_smooth(xbar)?;
    let shifted: Vec<T> = fbar.iter().zip(&l).map(|(&f, &li)| f + li * r2 * half).collect();
    let s2 = sdist(&shifted, problem.kernel())?;
    let denom = T::lit(2.0) * (sbar - s2);
    let gamma = if denom > T::zero() { (sbar / denom).min(T::one()) } else { T::one() };
    let w: Vec<T> = x.iter().zip(xbar).map(|(&xi, &bi)| xi + gamma * (bi - xi)).collect();
    let margin = sbar * sbar / (T::lit(4.0) * (sbar + norm(&l) * r2 * half));
    Ok(SlaterCombination { w, gamma, margin })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitBound<T> {
    pub gamma: T,
    pub slater_distance: T,
    /// `max{‖L‖, γ}·L_g`.
    pub constant: T,
    /// `constant·‖x0 − x*‖²/2`; divide by `k` for the bound at step `k`.
    pub numerator: T,
}

/// Explicit complexity constant built from `‖∇F(x0)‖_op`, `‖L‖`, the
/// distances between `x0`, `x*`, `x̄` and the Slater distance `d_x̄`.
pub fn explicit_bound<T: Scalar>(
    problem: &CompositeProblem<T>,
    x0: &[T],
    xstar: &[T],
    xbar: &[T],
) -> Result<ExplicitBound<T>> {
    let l = problem.smooth().curvature_or_err()?;
    let d = slater_distance(problem, xbar)?;
    let ln = norm(&l);
    let half = T::lit(0.5);
    let jac = problem.smooth().jacobian(x0)?;
    let op = operator_norm(&jac, problem.dim(), OP_NORM_ITERS, op_norm_tol());
    let r0 = dist(x0, xstar);
    let rbar = dist(xbar, xstar);
    let lead = op + ln * half * (T::lit(11.0) * r0 + rbar);
    let tail = d + ln * half * (rbar + r0).powi(2);
    let gamma = T::lit(8.0) * lead * lead * tail / (d * d);
    let lg = problem.kernel().lipschitz().value();
    let constant = ln.max(gamma) * lg;
    Ok(ExplicitBound {
        gamma,
        slater_distance: d,
        constant,
        numerator: constant * r0 * r0 * half,
    })
}

/// True when some inequality of the kernel is active at `z` within
/// `1e−8·(1 + |scale_i|)`.
pub fn on_boundary<T: Scalar>(kernel: &OuterKernel<T>, z: &[T], scale: &[T]) -> bool {
    kernel
        .constraint_block()
        .any(|i| z[i] >= -T::lit(1e-8) * (T::one() + scale[i].abs()))
}

/// Upper bound on `Lᵀν` for a multiplier of the subproblem at `x` with
/// minimizer `y`: `L_g‖L‖` when `H(x, y)` is interior, else the Slater-based
/// expression in `‖∇F(x)‖_op`, `‖x − y‖`, `‖x̄ − x‖` and `d_x̄`.
pub fn multiplier_bound<T: Scalar>(
    problem: &CompositeProblem<T>,
    x: &[T],
    y: &[T],
    xbar: &[T],
    boundary_case: bool,
) -> Result<T> {
    let l = problem.smooth().curvature_or_err()?;
    let ln = norm(&l);
    let lg = problem.kernel().lipschitz().value();
    if !boundary_case {
        return Ok(lg * ln);
    }
    let d = slater_distance(problem, xbar)?;
    let jac = problem.smooth().jacobian(x)?;
    let op = operator_norm(&jac, problem.dim(), OP_NORM_ITERS, op_norm_tol());
    let half = T::lit(0.5);
    let rb = dist(xbar, x);
    let lead = op + (T::lit(3.0) * dist(x, y) + rb) * ln * half;
    Ok(T::lit(8.0) * lg * lead * lead * (d + ln * rb * rb * half) / (d * d))
}

/// Stationarity measure at `x`: solve the model subproblem with `α = L` and
/// return `(Lᵀν)·‖y − x‖`, which equals `‖∇F(x)ᵀν‖` at the recovered
/// multiplier. Zero iff `x` is a minimizer.
pub fn fermat_residual<T: Scalar>(problem: &CompositeProblem<T>, x: &[T], opts: &SubsolveOptions<T>) -> Result<T> {
    let l = problem.smooth().curvature_or_err()?;
    let mv = problem.model(x, l)?;
    let sub = solve_subproblem(problem.kernel(), &mv, opts)?;
    Ok(sub.curvature_weight(&mv.alpha) * dist(&sub.y, x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport<T> {
    pub online_constant: T,
    /// `L_g‖L‖`, only when `g` is finite valued. Constraint multipliers are
    /// unbounded, so a domain constant alone does not cap `Lᵀν`.
    pub lipschitz_bound: Option<T>,
    /// Explicit constant `γ`, when a Slater point and `x*` are known and the
    /// domain has a boundary.
    pub explicit_gamma: Option<T>,
    /// `max_{j≤k} α_jᵀν_j · ‖x0 − x*‖² / (2k)` for `k ≥ 1`, when `x*` is known.
    pub per_iteration_bound: Vec<T>,
    pub fermat_residual: T,
    /// `d_x̄`, when a Slater point is known and the domain has a boundary.
    pub slater_margin: Option<T>,
}

/// Collects every certificate available for `trace`.
pub fn certificate_report<T: Scalar>(
    problem: &CompositeProblem<T>,
    trace: &RunTrace<T>,
    xstar: Option<&[T]>,
    xbar: Option<&[T]>,
    opts: &SubsolveOptions<T>,
) -> Result<CertificateReport<T>> {
    let online = online_constants(trace);
    let online_constant = online.last().copied().unwrap_or(T::zero());
    let lipschitz_bound = match problem.kernel().constraint_block().next() {
        Some(_) => None,
        None => lipschitz_condition_bound(problem)?.finite(),
    };
    let x0 = &trace.iterations[0].x;
    let per_iteration_bound = match xstar {
        Some(xs) => {
            let r2 = dist(x0, xs).powi(2);
            online
                .iter()
                .enumerate()
                .map(|(j, &c)| c * r2 / (T::lit(2.0) * T::from_count(j + 1)))
                .collect()
        }
        None => Vec::new(),
    };
    let fermat = fermat_residual(problem, &trace.last().x, opts)?;
    let slater_margin = match xbar {
        Some(xb) => match slater_distance(problem, xb) {
            Ok(d) => Some(d),
            Err(Error::NoBoundary) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let explicit_gamma = match (xstar, xbar, slater_margin) {
        (Some(xs), Some(xb), Some(_)) => Some(explicit_bound(problem, x0, xs, xb)?.gamma),
        _ => None,
    };
    Ok(CertificateReport {
        online_constant,
        lipschitz_bound,
        explicit_gamma,
        per_iteration_bound,
        fermat_residual: fermat,
        slater_margin,
    })
}

/// A named invariant that failed at a given iteration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invariant `{name}` violated at k = {k}: {detail}")]
pub struct InvariantViolation {
    pub name: &'static str,
    pub k: usize,
    pub detail: String,
}

impl InvariantViolation {
    fn new(name: &'static str, k: usize, detail: String) -> Self {
        Self { name, k, detail }
    }
}

/// Replayable checks over stored iterates.
pub mod invariants {
    use super::*;

    /// `g_{k+1} ≤ g_k + tol·(1 + |g_k|)`.
    pub fn descent<T: Scalar>(objectives: &[T], tol: T) -> Result<(), InvariantViolation> {
        for k in 1..objectives.len() {
            let (prev, cur) = (objectives[k - 1], objectives[k]);
            if !(cur <= prev + tol * (T::one() + prev.abs())) {
                return Err(InvariantViolation::new(
                    "descent",
                    k,
                    format!("objective rose from {prev:e} to {cur:e}"),
                ));
            }
        }
        Ok(())
    }

    /// `‖x_{k+1} − x*‖ ≤ ‖x_k − x*‖ + tol·(1 + ‖x_k − x*‖)`.
    pub fn fejer<T: Scalar>(iterates: &[&[T]], xstar: &[T], tol: T) -> Result<(), InvariantViolation> {
        for k in 1..iterates.len() {
            let prev = dist(iterates[k - 1], xstar);
            let cur = dist(iterates[k], xstar);
            if !(cur <= prev + tol * (T::one() + prev)) {
                return Err(InvariantViolation::new(
                    "fejer",
                    k,
                    format!("distance to x* rose from {prev:e} to {cur:e}"),
                ));
            }
        }
        Ok(())
    }

    /// `f_i(x_k) ≤ H_{α_k,i}(x_{k−1}, x_k) + tol·(1 + |f_i(x_k)|)`.
    pub fn majorization<T: Scalar>(
        problem: &CompositeProblem<T>,
        iterates: &[&[T]],
        alphas: &[&[T]],
        tol: T,
    ) -> Result<(), InvariantViolation> {
        for k in 1..iterates.len() {
            let bad = |detail: String| InvariantViolation::new("majorization", k, detail);
            let mv = problem
                .model(iterates[k - 1], alphas[k].to_vec())
                .map_err(|e| bad(e.to_string()))?;
            let ok = mv
                .majorization_holds(problem.smooth(), iterates[k], tol)
                .map_err(|e| bad(e.to_string()))?;
            if let Some(i) = ok.iter().position(|&b| !b) {
                return Err(bad(format!("component {i} exceeds its model")));
            }
        }
        Ok(())
    }

    /// `g_k − g* ≤ c_k·r0²/(2k)·(1 + tol)` with `c_k` the running online
    /// constant, for every `k ≥ 1`.
    pub fn online_certificate<T: Scalar>(
        objectives: &[T],
        online: &[T],
        gstar: T,
        r0_sq: T,
        tol: T,
    ) -> Result<(), InvariantViolation> {
        for (j, &c) in online.iter().enumerate() {
            let k = j + 1;
            let gap = objectives[k] - gstar;
            let bound = c * r0_sq / (T::lit(2.0) * T::from_count(k));
            if !(gap <= bound + tol * (T::one() + bound.abs() + gstar.abs())) {
                return Err(InvariantViolation::new(
                    "online-certificate",
                    k,
                    format!("gap {gap:e} exceeds bound {bound:e}"),
                ));
            }
        }
        Ok(())
    }

    /// `(α_k)_i ≤ max{η L_i, (α_0)_i}` wherever `L_i` is known.
    pub fn backtracking_cap<T: Scalar>(
        alphas: &[&[T]],
        lipschitz: &[Option<T>],
        eta: T,
    ) -> Result<(), InvariantViolation> {
        let Some(first) = alphas.first() else {
            return Ok(());
        };
        for (k, a) in alphas.iter().enumerate() {
            for (i, l) in lipschitz.iter().enumerate() {
                if let Some(l) = *l {
                    let cap = (eta * l).max(first[i]);
                    if a[i] > cap * (T::one() + T::lit(1e-12)) {
                        return Err(InvariantViolation::new(
                            "backtracking-cap",
                            k,
                            format!("alpha[{i}] = {:e} exceeds {cap:e}", a[i]),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every inequality component is at most `tol` at every iterate `k ≥ 1`.
    pub fn feasibility<T: Scalar>(
        problem: &CompositeProblem<T>,
        iterates: &[&[T]],
        tol: T,
    ) -> Result<(), InvariantViolation> {
        for (k, x) in iterates.iter().enumerate().skip(1) {
            let z = problem
                .eval_smooth(x)
                .map_err(|e| InvariantViolation::new("feasibility", k, e.to_string()))?;
            for i in problem.kernel().constraint_block() {
                if !(z[i] <= tol) {
                    return Err(InvariantViolation::new(
                        "feasibility",
                        k,
                        format!("constraint {i} evaluates to {:e}", z[i]),
                    ));
                }
            }
        }
        Ok(())
    }
}
