use std::io::Write;

use multiprox::diagnostics::online_constants;
use multiprox::linalg::dist;
use multiprox::{multiprox_run, pgnm_run, Config, Trace};
use rayon::prelude::*;
use serde::Serialize;

use crate::{generate_instance_with_b_std, normalized_gap, reference_solution, BenchError, MinMaxInstance, Reference};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    Multiprox,
    Pgnm,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Multiprox => "multiprox",
            Solver::Pgnm => "pgnm",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table1Config {
    pub n: usize,
    pub m_list: Vec<usize>,
    pub seeds: Vec<u64>,
    pub k_marks: Vec<usize>,
    /// Outer iterations per solver run.
    pub iterations: usize,
    /// Fermat tolerance of the reference run.
    pub reference_tolerance: f64,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    /// Standard deviation of the linear terms.
    pub b_std: f64,
    /// Keep the full run trace in every cell.
    pub keep_traces: bool,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            n: 100,
            m_list: vec![5, 10],
            seeds: (0..20).collect(),
            k_marks: vec![10, 20],
            iterations: 200,
            reference_tolerance: 1e-10,
            workers: None,
            b_std: crate::B_STD,
            keep_traces: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub k: usize,
    pub objective: f64,
    pub normalized_gap_percent: f64,
    pub step_norm: f64,
    /// Running `max_{j≤k} α_jᵀν_j` (zero at `k = 0`).
    pub online_constant: f64,
    pub distance_to_xstar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub m: usize,
    pub seed: u64,
    pub solver: Solver,
    pub gstar: f64,
    /// `‖x0 − x*‖`.
    pub initial_distance: f64,
    /// `max_i L_i`.
    pub lmax: f64,
    pub rows: Vec<IterationRow>,
    pub termination: String,
    pub xstar: Vec<f64>,
    pub trace: Option<Trace>,
}

impl CellResult {
    /// Gap at `k`, holding the last value once the run has pinned.
    pub fn gap_at(&self, k: usize) -> f64 {
        self.rows.get(k).unwrap_or_else(|| self.rows.last().expect("k = 0 row")).normalized_gap_percent
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub m: usize,
    pub solver: &'static str,
    pub k: usize,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub cells: Vec<CellResult>,
    /// `(m, seed, message)` for every instance that could not be run.
    pub failures: Vec<(usize, u64, String)>,
    pub summary: Vec<SummaryRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    m: usize,
    seed: u64,
    solver: &'a str,
    k: usize,
    normalized_gap_percent: f64,
    objective: f64,
    step_norm: f64,
    online_constant: f64,
}

impl BenchReport {
    /// One row per recorded iteration of every cell.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for cell in &self.cells {
            for r in &cell.rows {
                w.serialize(CsvRow {
                    m: cell.m,
                    seed: cell.seed,
                    solver: cell.solver.as_str(),
                    k: r.k,
                    normalized_gap_percent: r.normalized_gap_percent,
                    objective: r.objective,
                    step_norm: r.step_norm,
                    online_constant: r.online_constant,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.summary {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn mean_gap(&self, m: usize, solver: Solver, k: usize) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.m == m && r.solver == solver.as_str() && r.k == k)
            .map(|r| r.mean)
    }
}

fn rows_from_trace(trace: &Trace, reference: &Reference) -> Result<Vec<IterationRow>, BenchError> {
    let gaps = normalized_gap(&trace.objectives(), reference.gstar)?;
    let online = online_constants(trace);
    Ok(trace
        .iterations
        .iter()
        .zip(gaps)
        .map(|(it, gap)| IterationRow {
            k: it.k,
            objective: it.objective,
            normalized_gap_percent: gap,
            step_norm: it.step_norm,
            online_constant: if it.k == 0 { 0.0 } else { online[it.k - 1] },
            distance_to_xstar: dist(&it.x, &reference.xstar),
        })
        .collect())
}

/// Runs one solver on one instance from the origin for `iterations` outer
/// steps.
pub fn run_cell(
    instance: &MinMaxInstance,
    reference: &Reference,
    solver: Solver,
    iterations: usize,
    keep_trace: bool,
) -> Result<CellResult, BenchError> {
    let problem = instance.problem();
    let x0 = instance.origin();
    let cfg = Config {
        max_outer: iterations,
        ..Config::default()
    };
    let trace = match solver {
        Solver::Multiprox => multiprox_run(&problem, &x0, &cfg)?,
        Solver::Pgnm => pgnm_run(&problem, &x0, &cfg)?,
    };
    Ok(CellResult {
        m: instance.m,
        seed: instance.seed,
        solver,
        gstar: reference.gstar,
        initial_distance: dist(&x0, &reference.xstar),
        lmax: instance.lipschitz.iter().copied().fold(0.0, f64::max),
        rows: rows_from_trace(&trace, reference)?,
        termination: trace.termination.as_str().to_string(),
        xstar: reference.xstar.clone(),
        trace: keep_trace.then_some(trace),
    })
}

fn run_instance(n: usize, m: usize, seed: u64, cfg: &Table1Config) -> Result<Vec<CellResult>, BenchError> {
    let instance = generate_instance_with_b_std(n, m, seed, cfg.b_std)?;
    let reference = reference_solution(&instance.problem(), &instance.origin(), cfg.reference_tolerance)?;
    [Solver::Multiprox, Solver::Pgnm]
        .into_iter()
        .map(|s| run_cell(&instance, &reference, s, cfg.iterations, cfg.keep_traces))
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Generates every `(m, seed)` instance, solves it to reference accuracy,
/// runs both solvers and aggregates mean/std of the normalized gap at each
/// mark. Instances are processed in parallel; results are ordered by
/// `(m, seed, solver)` so the report does not depend on scheduling.
pub fn run_table1(cfg: &Table1Config) -> Result<BenchReport, BenchError> {
    let jobs: Vec<(usize, u64)> = cfg
        .m_list
        .iter()
        .flat_map(|&m| cfg.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let work = || -> Vec<(usize, u64, Result<Vec<CellResult>, BenchError>)> {
        jobs.par_iter()
            .map(|&(m, s)| (m, s, run_instance(cfg.n, m, s, cfg)))
            .collect()
    };
    let results = match cfg.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };

    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for (m, s, r) in results {
        match r {
            Ok(c) => cells.extend(c),
            Err(e) => failures.push((m, s, e.to_string())),
        }
    }
    let mut summary = Vec::new();
    for &m in &cfg.m_list {
        for solver in [Solver::Multiprox, Solver::Pgnm] {
            for &k in &cfg.k_marks {
                let gaps: Vec<f64> = cells
                    .iter()
                    .filter(|c| c.m == m && c.solver == solver)
                    .map(|c| c.gap_at(k))
                    .collect();
                if gaps.is_empty() {
                    continue;
                }
                let (mean, std) = mean_std(&gaps);
                summary.push(SummaryRow {
                    m,
                    solver: solver.as_str(),
                    k,
                    mean,
                    std,
                    count: gaps.len(),
                });
            }
        }
    }
    Ok(BenchReport {
        cells,
        failures,
        summary,
    })
}
