//! Outer loops: fixed-curvature iteration, selective backtracking and the
//! uniform-curvature (prox-linear) preset.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::kernels::OuterKernel;
use crate::linalg::{dist, norm};
use crate::model::{CompositeProblem, Extended, ModelVector};
use crate::subsolve::{solve_subproblem, SubSolution, SubsolveOptions};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `α = L` at every iteration.
    FixedL,
    /// Start from `alpha0` and inflate violating components by `eta`.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub mode: Mode,
    pub eta: T,
    /// Initial curvatures for backtracking. `None` means `L` when declared,
    /// else 1 on every component not declared affine.
    pub alpha0: Option<Vec<T>>,
    /// Stop when `‖x_{k+1} − x_k‖` is at most this. `None` means
    /// `1e−9·(1 + ‖x_k‖)`.
    pub step_tolerance: Option<T>,
    /// Stop when `αᵀν·‖x_{k+1} − x_k‖` is at most this.
    pub fermat_tolerance: T,
    pub max_outer: usize,
    pub subsolve: SubsolveOptions<T>,
    /// Relative tolerance of the majorization test in the backtracking loop.
    pub majorization_tolerance: T,
    pub max_inflations: usize,
    /// Constraint values in `(0, slack]` count as feasible when evaluating
    /// the objective of a new iterate; absorbs rounding on active
    /// constraints.
    pub feasibility_slack: T,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            mode: Mode::FixedL,
            eta: T::lit(2.0),
            alpha0: None,
            step_tolerance: None,
            fermat_tolerance: T::lit(1e-7),
            max_outer: 10_000,
            subsolve: SubsolveOptions::default(),
            majorization_tolerance: T::lit(1e-10),
            max_inflations: 200,
            feasibility_slack: T::lit(1e-10),
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn fixed() -> Self {
        Self::default()
    }

    pub fn backtracking(eta: T, alpha0: Option<Vec<T>>) -> Self {
        Self {
            mode: Mode::Backtracking,
            eta,
            alpha0,
            ..Self::default()
        }
    }

    fn step_tolerance_at(&self, x: &[T]) -> T {
        self.step_tolerance
            .unwrap_or_else(|| T::lit(1e-9) * (T::one() + norm(x)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The iterate is pinned and the Fermat residual is within tolerance.
    Optimal,
    /// The iterate is pinned by the step test only.
    StepTolerance,
    MaxIterations,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Optimal => "optimal",
            Termination::StepTolerance => "step-tolerance",
            Termination::MaxIterations => "max-iterations",
        }
    }
}

/// One recorded iterate. Entry `k ≥ 1` carries the subproblem answer and the
/// curvature vector that produced `x_k` from `x_{k−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Iteration<T> {
    pub k: usize,
    pub x: Vec<T>,
    pub objective: T,
    pub step_norm: T,
    pub alpha: Vec<T>,
    pub sub: Option<SubSolution<T>>,
    pub inflations: usize,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub iterations: Vec<Iteration<T>>,
    pub termination: Termination,
    /// Fermat residual at the final iterate when the run stopped by pinning.
    pub final_fermat: Option<T>,
}

impl<T: Scalar> RunTrace<T> {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn objectives(&self) -> Vec<T> {
        self.iterations.iter().map(|it| it.objective).collect()
    }

    pub fn iterates(&self) -> Vec<&[T]> {
        self.iterations.iter().map(|it| it.x.as_slice()).collect()
    }

    pub fn last(&self) -> &Iteration<T> {
        self.iterations.last().expect("trace holds the starting point")
    }

    /// `(α_k, ν_k)` for every `k ≥ 1`.
    pub fn multipliers(&self) -> Vec<(&[T], &[T])> {
        self.iterations
            .iter()
            .filter_map(|it| it.sub.as_ref().map(|s| (it.alpha.as_slice(), s.multiplier.as_slice())))
            .collect()
    }
}

/// `g(F(x))` where constraint values within `slack` of feasibility count as
/// feasible.
pub fn objective_with_slack<T: Scalar>(problem: &CompositeProblem<T>, x: &[T], slack: T) -> Result<Extended<T>> {
    let mut z = problem.eval_smooth(x)?;
    for i in problem.kernel().constraint_block() {
        if z[i] > T::zero() && z[i] <= slack {
            z[i] = T::zero();
        }
    }
    problem.kernel().value(&z)
}

fn solve_at<T: Scalar>(
    problem: &CompositeProblem<T>,
    x: &[T],
    alpha: &[T],
    opts: &SubsolveOptions<T>,
    iteration: usize,
) -> Result<(ModelVector<T>, SubSolution<T>)> {
    let wrap = |e: Error| Error::Subproblem {
        iteration,
        source: Box::new(e),
    };
    let mv = problem.model(x, alpha.to_vec()).map_err(wrap)?;
    let sub = solve_subproblem(problem.kernel(), &mv, opts).map_err(wrap)?;
    Ok((mv, sub))
}

fn check_config<T: Scalar>(config: &SolverConfig<T>) -> Result<()> {
    if !(config.eta > T::one()) {
        return Err(Error::InvalidConfig("eta must exceed 1".into()));
    }
    if config.fermat_tolerance < T::zero() || config.step_tolerance.is_some_and(|t| t < T::zero()) {
        return Err(Error::InvalidConfig("tolerances must be nonnegative".into()));
    }
    Ok(())
}

/// Checks `alpha0 ∈ Γ`: zero exactly on components declared affine.
fn check_gamma<T: Scalar>(problem: &CompositeProblem<T>, alpha: &[T]) -> Result<()> {
    let comps = problem.smooth().components();
    if alpha.len() != comps.len() {
        return Err(Error::ArityMismatch {
            expected: comps.len(),
            got: alpha.len(),
        });
    }
    for (i, (c, &a)) in comps.iter().zip(alpha).enumerate() {
        let affine = c.lipschitz() == Some(T::zero());
        if !(a >= T::zero()) || !a.is_finite() || (a == T::zero()) != affine {
            return Err(Error::InvalidConfig(format!(
                "alpha0[{i}] = {a} is not admissible (zero exactly on affine components)"
            )));
        }
    }
    Ok(())
}

fn default_alpha0<T: Scalar>(problem: &CompositeProblem<T>) -> Vec<T> {
    problem
        .smooth()
        .components()
        .iter()
        .map(|c| c.lipschitz().unwrap_or(T::one()))
        .collect()
}

/// Fermat residual at a pinned iterate: through `L` when declared (the
/// standalone diagnostic), else read off the last subproblem.
fn terminal_fermat<T: Scalar>(
    problem: &CompositeProblem<T>,
    x: &[T],
    fallback: T,
    opts: &SubsolveOptions<T>,
) -> Result<T> {
    match problem.curvature() {
        Some(_) => crate::diagnostics::fermat_residual(problem, x, opts),
        None => Ok(fallback),
    }
}

fn run_core<T: Scalar>(
    problem: &CompositeProblem<T>,
    x0: &[T],
    mut alpha: Vec<T>,
    backtracking: bool,
    config: &SolverConfig<T>,
) -> Result<RunTrace<T>> {
    check_config(config)?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    let start = Instant::now();
    let g0 = match problem.objective(x0)? {
        Extended::Finite(v) => v,
        Extended::PosInfinity => return Err(Error::InfeasibleStart),
    };
    let mut iterations = vec![Iteration {
        k: 0,
        x: x0.to_vec(),
        objective: g0,
        step_norm: T::zero(),
        alpha: alpha.clone(),
        sub: None,
        inflations: 0,
        elapsed_secs: 0.0,
    }];
    let mut x = x0.to_vec();

    for k in 1..=config.max_outer {
        let (mut mv, mut sub) = solve_at(problem, &x, &alpha, &config.subsolve, k)?;
        let mut inflations = 0;
        if backtracking {
            loop {
                let ok = mv.majorization_holds(problem.smooth(), &sub.y, config.majorization_tolerance)?;
                if ok.iter().all(|&b| b) {
                    break;
                }
                inflations += 1;
                if inflations > config.max_inflations {
                    return Err(Error::WhileLoopDivergence {
                        iteration: k,
                        inflations: config.max_inflations,
                    });
                }
                for (a, holds) in alpha.iter_mut().zip(ok) {
                    if !holds {
                        *a *= config.eta;
                    }
                }
                (mv, sub) = solve_at(problem, &x, &alpha, &config.subsolve, k)?;
            }
        }

        let step = dist(&sub.y, &x);
        let weighted = sub.curvature_weight(&mv.alpha) * step;
        if step <= config.step_tolerance_at(&x) || weighted <= config.fermat_tolerance {
            let fermat = terminal_fermat(problem, &x, weighted, &config.subsolve)?;
            let termination = if fermat <= config.fermat_tolerance {
                Termination::Optimal
            } else {
                Termination::StepTolerance
            };
            return Ok(RunTrace {
                iterations,
                termination,
                final_fermat: Some(fermat),
            });
        }

        let objective = match objective_with_slack(problem, &sub.y, config.feasibility_slack)? {
            Extended::Finite(v) => v,
            Extended::PosInfinity => {
                return Err(Error::Subproblem {
                    iteration: k,
                    source: Box::new(Error::DomainViolation),
                })
            }
        };
        x = sub.y.clone();
        iterations.push(Iteration {
            k,
            x: x.clone(),
            objective,
            step_norm: step,
            alpha: alpha.clone(),
            sub: Some(sub),
            inflations,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(RunTrace {
        iterations,
        termination: Termination::MaxIterations,
        final_fermat: None,
    })
}

/// Runs the mode selected in `config`.
pub fn run<T: Scalar>(problem: &CompositeProblem<T>, x0: &[T], config: &SolverConfig<T>) -> Result<RunTrace<T>> {
    match config.mode {
        Mode::FixedL => multiprox_run(problem, x0, config),
        Mode::Backtracking => multiprox_backtracking_run(problem, x0, config),
    }
}

/// `x_{k+1} ∈ argmin_y g(H_L(x_k, y))`.
pub fn multiprox_run<T: Scalar>(
    problem: &CompositeProblem<T>,
    x0: &[T],
    config: &SolverConfig<T>,
) -> Result<RunTrace<T>> {
    let alpha = problem.smooth().curvature_or_err()?;
    run_core(problem, x0, alpha, false, config)
}

/// Backtracking variant: the curvature vector starts at `alpha0` and each
/// component violating majorization at the candidate is multiplied by `eta`
/// before re-solving.
pub fn multiprox_backtracking_run<T: Scalar>(
    problem: &CompositeProblem<T>,
    x0: &[T],
    config: &SolverConfig<T>,
) -> Result<RunTrace<T>> {
    let alpha = match &config.alpha0 {
        Some(a) => a.clone(),
        None => default_alpha0(problem),
    };
    check_gamma(problem, &alpha)?;
    run_core(problem, x0, alpha, true, config)
}

/// Fixed-curvature iteration with the uniform vector `(L, …, L)`,
/// `L = max_i L_i`. Max kernel only.
pub fn pgnm_run<T: Scalar>(problem: &CompositeProblem<T>, x0: &[T], config: &SolverConfig<T>) -> Result<RunTrace<T>> {
    if !matches!(problem.kernel(), OuterKernel::Max(_)) {
        return Err(Error::InvalidProblem("the uniform-curvature preset needs the max kernel".into()));
    }
    let curvature = problem.smooth().curvature_or_err()?;
    let top = curvature.iter().copied().fold(T::zero(), T::max);
    run_core(problem, x0, vec![top; curvature.len()], false, config)
}

/// True iff the subproblem at `mv.base` does not improve on `g(F(x))` by
/// more than `value_tol·(1 + |g(F(x))|)` and moves at most `step_tol`.
pub fn fixed_point_check<T: Scalar>(
    problem: &CompositeProblem<T>,
    mv: &ModelVector<T>,
    opts: &SubsolveOptions<T>,
    step_tol: T,
    value_tol: T,
) -> Result<bool> {
    let gx = problem.objective(&mv.base)?.finite().ok_or(Error::DomainViolation)?;
    let sub = solve_subproblem(problem.kernel(), mv, opts)?;
    let step = dist(&sub.y, &mv.base);
    Ok(sub.value >= gx - value_tol * (T::one() + gx.abs()) && step <= step_tol)
}
