use crate::error::{Error, Result};
use crate::linalg::{combine_rows, dot, max_abs, norm, norm_sq};
use crate::model::ModelVector;
use crate::subsolve::dual::{maximize, Cone, DualEval, DualOracle};
use crate::subsolve::{kkt_residual_parts, SubSolution, SubsolveOptions};
use crate::Scalar;

/// Dual of `min_d max_i a_i + g_iᵀd + (α_i/2)‖d‖²` over the simplex,
/// `φ(ν) = aᵀν − ‖Gν‖²/(2αᵀν)`, evaluated through the Gram matrix `GGᵀ` so
/// that an evaluation costs `O(m²)` regardless of `n`.
struct MaxDual<T> {
    a: Vec<T>,
    alpha: Vec<T>,
    gram: Vec<T>,
}

impl<T: Scalar> MaxDual<T> {
    fn new(a: &[T], rows: &[Vec<T>], alpha: &[T]) -> Self {
        let m = a.len();
        let mut gram = vec![T::zero(); m * m];
        for i in 0..m {
            for j in i..m {
                let v = dot(&rows[i], &rows[j]);
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        Self {
            a: a.to_vec(),
            alpha: alpha.to_vec(),
            gram,
        }
    }
}

impl<T: Scalar> DualOracle<T> for MaxDual<T> {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn cone(&self) -> Cone {
        Cone::Simplex
    }

    fn evaluate(&self, nu: &[T]) -> DualEval<T> {
        let m = self.dim();
        let curv = dot(&self.alpha, nu);
        if !(curv > T::zero()) {
            return DualEval::unbounded(m);
        }
        let k_nu: Vec<T> = (0..m).map(|i| dot(&self.gram[i * m..(i + 1) * m], nu)).collect();
        let q = dot(nu, &k_nu).max(T::zero());
        let half = T::lit(0.5);
        let value = dot(&self.a, nu) - half * q / curv;
        // g_iᵀd and ‖d‖² at d = −Gν/(αᵀν)
        let gd: Vec<T> = k_nu.iter().map(|&v| -v / curv).collect();
        let dd = q / (curv * curv);
        let grad: Vec<T> = (0..m)
            .map(|i| self.a[i] + gd[i] + half * self.alpha[i] * dd)
            .collect();
        let mut hessian = vec![T::zero(); m * m];
        for i in 0..m {
            for j in 0..m {
                let w = self.gram[i * m + j]
                    + self.alpha[j] * gd[i]
                    + self.alpha[i] * gd[j]
                    + self.alpha[i] * self.alpha[j] * dd;
                hessian[i * m + j] = -w / curv;
            }
        }
        DualEval {
            value,
            grad,
            hessian,
        }
    }

    fn residual(&self, nu: &[T], eval: &DualEval<T>) -> T {
        let top = eval.grad.iter().copied().fold(T::neg_infinity(), T::max);
        (top - dot(nu, &eval.grad)).max(T::zero())
    }
}

pub(crate) struct MaxSolution<T> {
    pub y: Vec<T>,
    pub nu: Vec<T>,
    pub value: T,
    pub gap: T,
    pub iterations: usize,
    pub history: Vec<T>,
}

/// Minimizes `max_i a_i + g_iᵀ(y − x) + (α_i/2)‖y − x‖²` over `y`.
pub(crate) fn solve_max_parts<T: Scalar>(
    x: &[T],
    a: &[T],
    rows: &[Vec<T>],
    alpha: &[T],
    opts: &SubsolveOptions<T>,
) -> Result<MaxSolution<T>> {
    let m = a.len();
    if m == 0 {
        return Err(Error::Empty("max subproblem needs at least one component"));
    }
    if alpha.iter().all(|&v| v == T::zero()) {
        // a max of affine models has no minimizer unless 0 lies in the
        // interior of the gradient hull; that LP case is not handled here
        return Err(Error::UnboundedSubproblem);
    }
    let grad_scale = rows.iter().map(|r| norm(r)).fold(T::zero(), T::max);
    let tol = opts.tolerance * T::one().max(max_abs(a)).max(grad_scale);

    let oracle = MaxDual::new(a, rows, alpha);
    let init = vec![T::one() / T::from_count(m); m];
    let out = maximize(&oracle, init, tol, opts.max_iterations);
    if !out.eval.value.is_finite() {
        return Err(Error::UnboundedSubproblem);
    }
    let nu = out.nu;
    let curv = dot(alpha, &nu);
    let combo = combine_rows(rows, &nu, x.len());
    let d: Vec<T> = combo.iter().map(|&v| -v / curv).collect();
    let dd = norm_sq(&d);
    let half = T::lit(0.5);
    let model_values: Vec<T> = (0..m)
        .map(|i| a[i] + dot(&rows[i], &d) + half * alpha[i] * dd)
        .collect();
    let value = model_values.iter().copied().fold(T::neg_infinity(), T::max);
    let gap = (value - dot(&nu, &model_values)).max(T::zero());
    if !out.converged && gap > tol {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            residual: gap.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    let y = x.iter().zip(&d).map(|(&xi, &di)| xi + di).collect();
    Ok(MaxSolution {
        y,
        nu,
        value,
        gap,
        iterations: out.iterations,
        history: out.history,
    })
}

/// Solves `min_y max_i H_i(x, y)` for the max kernel. The primal point is
/// recovered from the dual as `y = x − Σν_i∇f_i(x) / Σν_iα_i`.
pub fn solve_max_subproblem<T: Scalar>(
    mv: &ModelVector<T>,
    opts: &SubsolveOptions<T>,
) -> Result<SubSolution<T>> {
    let sol = solve_max_parts(&mv.base, &mv.values, &mv.jacobian, &mv.alpha, opts)?;
    let kkt = kkt_residual_parts(mv, &sol.y, &sol.nu, None);
    Ok(SubSolution {
        y: sol.y,
        value: sol.value,
        multiplier: sol.nu,
        kkt_residual: kkt,
        duality_gap: sol.gap,
        inner_iterations: sol.iterations,
        dual_history: sol.history,
    })
}
