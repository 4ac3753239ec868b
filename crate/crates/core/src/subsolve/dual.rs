//! Concave dual maximization shared by the max and NLP subproblem solvers.
//!
//! Each iteration first tries a Newton step restricted to the current face
//! of the feasible cone (the dual Hessian is available in closed form and
//! only `k × k`), then takes a projected gradient step with backtracking.
//! Both steps are accepted only if the dual value does not decrease.

use crate::linalg::{dot, max_abs, norm_sq, solve_dense};
use crate::subsolve::simplex::project_simplex;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cone {
    /// `{ν ≥ 0, Σν = 1}`
    Simplex,
    /// `{μ ≥ 0}`
    Orthant,
}

#[derive(Debug, Clone)]
pub(crate) struct DualEval<T> {
    /// Dual value; `-∞` where the inner minimization is unbounded.
    pub value: T,
    /// Gradient, equal to the model values at the recovered primal point.
    pub grad: Vec<T>,
    /// Row-major Hessian (negative semidefinite).
    pub hessian: Vec<T>,
}

impl<T: Scalar> DualEval<T> {
    pub fn unbounded(k: usize) -> Self {
        Self {
            value: T::neg_infinity(),
            grad: vec![T::zero(); k],
            hessian: vec![T::zero(); k * k],
        }
    }
}

pub(crate) trait DualOracle<T: Scalar> {
    fn dim(&self) -> usize;
    fn cone(&self) -> Cone;
    fn evaluate(&self, nu: &[T]) -> DualEval<T>;
    /// Nonnegative optimality measure; zero exactly at a dual solution.
    fn residual(&self, nu: &[T], eval: &DualEval<T>) -> T;
}

#[derive(Debug, Clone)]
pub(crate) struct DualOutcome<T> {
    pub nu: Vec<T>,
    pub eval: DualEval<T>,
    pub iterations: usize,
    pub history: Vec<T>,
    pub residual: T,
    pub converged: bool,
}

fn project<T: Scalar>(cone: Cone, v: &mut Vec<T>) {
    match cone {
        Cone::Simplex => *v = project_simplex(v).expect("finite dual iterate"),
        Cone::Orthant => v.iter_mut().for_each(|x| *x = x.max(T::zero())),
    }
}

/// Slack allowed when comparing dual values that differ only by rounding.
fn rounding_slack<T: Scalar>(v: T) -> T {
    T::lit(16.0) * T::epsilon() * (T::one() + v.abs())
}

fn newton_candidate<T: Scalar, O: DualOracle<T>>(
    oracle: &O,
    nu: &[T],
    eval: &DualEval<T>,
) -> Option<Vec<T>> {
    let k = nu.len();
    let cone = oracle.cone();
    let face: Vec<usize> = (0..k)
        .filter(|&i| {
            nu[i] > T::zero() || (cone == Cone::Orthant && eval.grad[i] > T::zero())
        })
        .collect();
    let s = face.len();
    if s == 0 || (cone == Cone::Simplex && s == 1) {
        return None;
    }
    let hmax = max_abs(&eval.hessian).max(T::min_positive_value());
    let size = if cone == Cone::Simplex { s + 1 } else { s };
    let solve = |ridge: T| {
        let mut a = vec![T::zero(); size * size];
        let mut rhs = vec![T::zero(); size];
        for (r, &i) in face.iter().enumerate() {
            for (c, &j) in face.iter().enumerate() {
                a[r * size + c] = eval.hessian[i * k + j];
            }
            a[r * size + r] -= ridge;
            rhs[r] = -eval.grad[i];
            if cone == Cone::Simplex {
                a[r * size + s] = -T::one();
                a[s * size + r] = T::one();
            }
        }
        solve_dense(a, rhs, T::lit(1e-13))
    };
    let step = solve(T::zero())
        .or_else(|| solve(T::lit(1e-10) * hmax))
        .or_else(|| solve(T::lit(1e-6) * hmax))?;

    // ratio test keeps the iterate in the cone; the blocking coordinate
    // leaves the face
    let mut tau = T::one();
    let mut blocking = None;
    for (r, &i) in face.iter().enumerate() {
        if step[r] < T::zero() {
            let t = -nu[i] / step[r];
            if t < tau {
                tau = t;
                blocking = Some(i);
            }
        }
    }
    let mut cand = nu.to_vec();
    for (r, &i) in face.iter().enumerate() {
        cand[i] += tau * step[r];
    }
    if let Some(b) = blocking {
        cand[b] = T::zero();
    }
    project(cone, &mut cand);
    Some(cand)
}

pub(crate) fn maximize<T: Scalar, O: DualOracle<T>>(
    oracle: &O,
    init: Vec<T>,
    tol: T,
    max_iterations: usize,
) -> DualOutcome<T> {
    let cone = oracle.cone();
    let mut nu = init;
    project(cone, &mut nu);
    let mut eval = oracle.evaluate(&nu);
    let mut history = vec![eval.value];
    if !eval.value.is_finite() {
        return DualOutcome {
            residual: T::infinity(),
            nu,
            eval,
            iterations: 0,
            history,
            converged: false,
        };
    }
    // initial step from the curvature scale of the dual
    let hmax = max_abs(&eval.hessian) * T::from_count(nu.len());
    let mut step = if hmax > T::zero() { T::one() / hmax } else { T::one() };
    let mut residual = oracle.residual(&nu, &eval);
    let mut iterations = 0;

    while iterations < max_iterations {
        if residual <= tol {
            return DualOutcome {
                nu,
                eval,
                iterations,
                history,
                residual,
                converged: true,
            };
        }
        iterations += 1;

        if let Some(cand) = newton_candidate(oracle, &nu, &eval) {
            let ce = oracle.evaluate(&cand);
            if ce.value.is_finite() && ce.value >= eval.value - rounding_slack(eval.value) {
                history.push(ce.value);
                nu = cand;
                eval = ce;
                residual = oracle.residual(&nu, &eval);
                if residual <= tol {
                    continue;
                }
            }
        }

        // projected gradient step, backtracking on the quadratic lower model
        let mut accepted = false;
        for _ in 0..80 {
            let mut cand: Vec<T> = nu
                .iter()
                .zip(&eval.grad)
                .map(|(&v, &g)| v + step * g)
                .collect();
            project(cone, &mut cand);
            let diff: Vec<T> = cand.iter().zip(&nu).map(|(&a, &b)| a - b).collect();
            let dd = norm_sq(&diff);
            if dd == T::zero() {
                break;
            }
            let ce = oracle.evaluate(&cand);
            let model = eval.value + dot(&eval.grad, &diff) - dd / (T::lit(2.0) * step);
            if ce.value.is_finite()
                && ce.value >= model - rounding_slack(eval.value)
                && ce.value >= eval.value - rounding_slack(eval.value)
            {
                history.push(ce.value);
                nu = cand;
                eval = ce;
                step *= T::lit(2.0);
                accepted = true;
                break;
            }
            step *= T::lit(0.5);
        }
        residual = oracle.residual(&nu, &eval);
        if !accepted && residual > tol {
            // no ascent direction left at working precision
            break;
        }
    }
    DualOutcome {
        converged: residual <= tol,
        nu,
        eval,
        iterations,
        history,
        residual,
    }
}
