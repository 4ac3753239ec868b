//! Synthetic min-max benchmark: instance generation, reference solutions
//! and normalized suboptimality gap tables for the per-component and
//! uniform-curvature solvers.

mod instance;
mod table;

pub use instance::{generate_instance, generate_instance_with_b_std, MinMaxInstance, B_STD};
pub use table::{run_cell, run_table1, BenchReport, CellResult, IterationRow, Solver, SummaryRow, Table1Config};

use multiprox::diagnostics::fermat_residual;
use multiprox::{multiprox_run, Config, Problem, SubsolveOptions, Termination};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("instance needs n ≥ 2 and m ≥ 2 (got n = {n}, m = {m})")]
    InvalidDimensions { n: usize, m: usize },
    #[error("standard deviation must be positive and finite (got {0})")]
    InvalidScale(f64),
    #[error(transparent)]
    Solver(#[from] multiprox::Error),
    #[error("reference run stopped at Fermat residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("starting point is already optimal; normalized gap undefined")]
    DegenerateGap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub xstar: Vec<f64>,
    pub gstar: f64,
    pub fermat: f64,
    pub iterations: usize,
}

/// Runs the fixed-curvature method from `x0` until the Fermat residual is
/// at most `tol` (step test disabled, at most 200 000 outer iterations).
pub fn reference_solution(problem: &Problem, x0: &[f64], tol: f64) -> Result<Reference, BenchError> {
    let inner = SubsolveOptions {
        tolerance: 1e-13,
        max_iterations: 10_000,
    };
    let cfg = Config {
        step_tolerance: Some(0.0),
        fermat_tolerance: tol,
        max_outer: 200_000,
        subsolve: inner,
        ..Config::default()
    };
    let trace = multiprox_run(problem, x0, &cfg)?;
    let last = trace.last();
    let fermat = match trace.final_fermat {
        Some(f) => f,
        None => fermat_residual(problem, &last.x, &inner)?,
    };
    if trace.termination != Termination::Optimal || fermat > tol {
        return Err(BenchError::NonConvergence {
            iterations: trace.len() - 1,
            residual: fermat,
        });
    }
    Ok(Reference {
        xstar: last.x.clone(),
        gstar: last.objective,
        fermat,
        iterations: trace.len() - 1,
    })
}

/// `100·(g_k − g*)/(g_0 − g*)` for every recorded objective.
pub fn normalized_gap(objectives: &[f64], gstar: f64) -> Result<Vec<f64>, BenchError> {
    let g0 = *objectives.first().ok_or(BenchError::DegenerateGap)?;
    let span = g0 - gstar;
    if !(span > 0.0) {
        return Err(BenchError::DegenerateGap);
    }
    Ok(objectives
        .iter()
        .map(|&g| if g == g0 { 100.0 } else { 100.0 * (g - gstar) / span })
        .collect())
}
