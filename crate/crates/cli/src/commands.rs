use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use multiprox::diagnostics::invariants;
use multiprox::diagnostics::InvariantViolation;
use multiprox::driver::objective_with_slack;
use multiprox::linalg::{dist, dot};
use multiprox::{
    multiprox_backtracking_run, multiprox_run, pgnm_run, Config, Extended, KernelStructure, Mode, SubsolveOptions,
    Termination, Trace,
};
use multiprox_bench::{generate_instance_with_b_std, reference_solution, run_table1, BenchReport, Reference, Table1Config};

use crate::{classify, classify_bench, CliError, ProblemFile, RunLabel, TraceFile};

/// Relative tolerance of every replayed check.
const VERIFY_TOL: f64 = 1e-9;
/// Fermat tolerance of the reference run behind `x*`.
const REFERENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Fixed,
    Backtracking,
    Pgnm,
}

impl ModeArg {
    fn solver_name(self) -> &'static str {
        match self {
            ModeArg::Fixed => "multiprox",
            ModeArg::Backtracking => "multiprox-backtracking",
            ModeArg::Pgnm => "pgnm",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub mode: ModeArg,
    pub eta: f64,
    /// One entry per listed component; the identity block is padded.
    pub alpha0: Option<Vec<f64>>,
    pub tol_step: Option<f64>,
    pub tol_inner: f64,
    pub tol_fermat: f64,
    pub max_outer: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Solve once more to reference accuracy to record `x*` and `g*`.
    pub reference: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let core = Config::default();
        Self {
            mode: ModeArg::Fixed,
            eta: core.eta,
            alpha0: None,
            tol_step: None,
            tol_inner: core.subsolve.tolerance,
            tol_fermat: core.fermat_tolerance,
            max_outer: core.max_outer,
            seed: 0,
            out: PathBuf::from("trace.csv"),
            reference: true,
        }
    }
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub trace: Trace,
    pub file: TraceFile,
}

pub fn cmd_solve(problem_path: &Path, opts: &SolveOptions) -> Result<SolveOutcome, CliError> {
    let spec = ProblemFile::load(problem_path)?;
    let problem = spec.build()?;
    let x0 = spec.x0.as_slice();
    if let Extended::PosInfinity = problem.objective(x0).map_err(classify)? {
        return Err(CliError::InfeasibleStart);
    }
    let subsolve = SubsolveOptions {
        tolerance: opts.tol_inner,
        ..SubsolveOptions::default()
    };
    let mut cfg = Config {
        step_tolerance: opts.tol_step,
        fermat_tolerance: opts.tol_fermat,
        max_outer: opts.max_outer,
        subsolve,
        eta: opts.eta,
        ..Config::default()
    };
    let trace = match opts.mode {
        ModeArg::Fixed => multiprox_run(&problem, x0, &cfg),
        ModeArg::Pgnm => pgnm_run(&problem, x0, &cfg),
        ModeArg::Backtracking => {
            cfg.mode = Mode::Backtracking;
            cfg.alpha0 = match &opts.alpha0 {
                Some(a) => Some(spec.pad_to_problem(&problem, a)?),
                None => None,
            };
            multiprox_backtracking_run(&problem, x0, &cfg)
        }
    }
    .map_err(classify)?;
    info!(
        "{} finished after {} iterations: {}",
        opts.mode.solver_name(),
        trace.len() - 1,
        trace.termination.as_str()
    );

    let reference = if opts.reference {
        match reference_solution(&problem, x0, REFERENCE_TOL) {
            Ok(r) => Some(r),
            Err(e) => {
                warn!("no reference solution recorded: {e}");
                None
            }
        }
    } else {
        None
    };
    let label = RunLabel {
        m: spec.components.len(),
        seed: opts.seed,
        solver: opts.mode.solver_name(),
        eta: (opts.mode == ModeArg::Backtracking).then_some(opts.eta),
        fermat_tolerance: opts.tol_fermat,
        problem_sha256: spec.digest(),
    };
    let mut file = TraceFile::from_run(&problem, &trace, label, reference.as_ref(), spec.xbar.as_deref(), &subsolve)?;
    file.write(&opts.out)?;
    Ok(SolveOutcome { trace, file })
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub n: usize,
    pub m_list: Vec<usize>,
    pub seeds: usize,
    /// First seed; instances use `seed, seed + 1, …`.
    pub seed: u64,
    pub iterations: usize,
    pub workers: Option<usize>,
    pub out: PathBuf,
    /// Write a problem file and a verifiable trace for every cell.
    pub traces: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        let t = Table1Config::default();
        Self {
            n: t.n,
            m_list: t.m_list,
            seeds: t.seeds.len(),
            seed: 0,
            iterations: t.iterations,
            workers: None,
            out: PathBuf::from("bench-out"),
            traces: true,
        }
    }
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub report: BenchReport,
    /// `(problem, trace)` paths, one per cell.
    pub traces: Vec<(PathBuf, PathBuf)>,
}

fn output_err(p: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", p.display()))
}

fn create(p: &Path) -> Result<fs::File, CliError> {
    fs::File::create(p).map_err(|e| output_err(p, e))
}

pub fn cmd_bench(opts: &BenchOptions) -> Result<BenchOutcome, CliError> {
    let cfg = Table1Config {
        n: opts.n,
        m_list: opts.m_list.clone(),
        seeds: (opts.seed..opts.seed + opts.seeds as u64).collect(),
        iterations: opts.iterations,
        workers: opts.workers,
        keep_traces: opts.traces,
        ..Table1Config::default()
    };
    let report = run_table1(&cfg).map_err(classify_bench)?;
    for (m, seed, msg) in &report.failures {
        warn!("m = {m}, seed = {seed} failed: {msg}");
    }
    if report.cells.is_empty() && !report.failures.is_empty() {
        return Err(CliError::AllCellsFailed);
    }

    let dir = &opts.out;
    fs::create_dir_all(dir).map_err(|e| output_err(dir, e))?;
    let path = dir.join("bench.csv");
    report.write_csv(create(&path)?).map_err(|e| output_err(&path, e))?;
    let path = dir.join("summary.csv");
    report.write_summary(create(&path)?).map_err(|e| output_err(&path, e))?;
    let path = dir.join("failures.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["m", "seed", "message"]).map_err(|e| output_err(&path, e))?;
    for (m, seed, msg) in &report.failures {
        w.write_record([m.to_string(), seed.to_string(), msg.clone()])
            .map_err(|e| output_err(&path, e))?;
    }
    w.flush().map_err(|e| output_err(&path, e))?;

    let mut traces = Vec::new();
    for cell in report.cells.iter() {
        let Some(trace) = &cell.trace else { continue };
        let instance = generate_instance_with_b_std(opts.n, cell.m, cell.seed, cfg.b_std).map_err(classify_bench)?;
        let spec = ProblemFile::from(&instance);
        let problem_path = dir.join(format!("problem_m{}_seed{}.json", cell.m, cell.seed));
        fs::write(&problem_path, spec.to_json_compact()).map_err(|e| output_err(&problem_path, e))?;
        let reference = Reference {
            xstar: cell.xstar.clone(),
            gstar: cell.gstar,
            fermat: 0.0,
            iterations: 0,
        };
        let label = RunLabel {
            m: cell.m,
            seed: cell.seed,
            solver: cell.solver.as_str(),
            eta: None,
            fermat_tolerance: Config::default().fermat_tolerance,
            problem_sha256: spec.digest(),
        };
        let subsolve = SubsolveOptions::default();
        let mut file = TraceFile::from_run(&instance.problem(), trace, label, Some(&reference), None, &subsolve)?;
        let trace_path = dir.join(format!("trace_m{}_seed{}_{}.csv", cell.m, cell.seed, cell.solver.as_str()));
        file.write(&trace_path)?;
        traces.push((problem_path, trace_path));
    }
    Ok(BenchOutcome { report, traces })
}

fn violation(name: &'static str, k: usize, detail: String) -> CliError {
    CliError::Invariant(InvariantViolation { name, k, detail })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VERIFY_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Replays the invariant suite on a stored trace. Returns the names of the
/// checks that ran.
pub fn cmd_verify(trace_path: &Path, problem_path: &Path) -> Result<Vec<&'static str>, CliError> {
    let spec = ProblemFile::load(problem_path)?;
    let problem = spec.build()?;
    let (file, hash_ok) = TraceFile::read(trace_path)?;
    let side = &file.sidecar;
    if spec.digest() != side.problem_sha256 {
        return Err(CliError::Mismatch("problem hash differs from the one recorded with the trace".into()));
    }

    let len = file.rows.len();
    let n_comp = problem.smooth().len();
    if len == 0
        || side.iterates.len() != len
        || side.alphas.len() != len
        || side.multipliers.len() + 1 != len
        || side.lipschitz.len() != n_comp
    {
        return Err(CliError::Mismatch("row count differs from the recorded iterates".into()));
    }
    for (i, r) in file.rows.iter().enumerate() {
        if r.k != i || side.iterates[i].len() != problem.dim() || side.alphas[i].len() != n_comp {
            return Err(CliError::Mismatch(format!("row {i} does not line up with the sidecar")));
        }
    }
    if side.multipliers.iter().any(|nu| nu.len() != problem.kernel().arity()) {
        return Err(CliError::Mismatch("multiplier length differs from the kernel arity".into()));
    }

    let mut ran = Vec::new();
    let objectives: Vec<f64> = file.rows.iter().map(|r| r.objective).collect();
    let iterates: Vec<&[f64]> = side.iterates.iter().map(Vec::as_slice).collect();
    let alphas: Vec<&[f64]> = side.alphas.iter().map(Vec::as_slice).collect();

    invariants::descent(&objectives, VERIFY_TOL)?;
    ran.push("descent");

    let slack = Config::default().feasibility_slack;
    for (k, (x, &g)) in iterates.iter().zip(&objectives).enumerate() {
        let actual = objective_with_slack(&problem, x, slack).map_err(classify)?;
        match actual {
            Extended::Finite(v) if close(v, g) => {}
            other => return Err(violation("objective", k, format!("recorded {g:e}, recomputed {other:?}"))),
        }
    }
    ran.push("objective");

    invariants::majorization(&problem, &iterates, &alphas, VERIFY_TOL)?;
    ran.push("majorization");

    let mut online = Vec::with_capacity(len - 1);
    let mut best = 0.0_f64;
    for (a, nu) in alphas.iter().skip(1).zip(&side.multipliers) {
        best = best.max(dot(a, nu));
        online.push(best);
    }
    for (k, r) in file.rows.iter().enumerate() {
        let expect = if k == 0 { 0.0 } else { online[k - 1] };
        if !close(r.online_constant, expect) {
            return Err(violation(
                "online-constant",
                k,
                format!("recorded {:e}, recomputed {expect:e}", r.online_constant),
            ));
        }
    }
    ran.push("online-constant");

    if let Some(xs) = &side.xstar {
        invariants::fejer(&iterates, xs, VERIFY_TOL)?;
        ran.push("fejer");
        if let Some(gs) = side.gstar {
            let r0_sq = dist(iterates[0], xs).powi(2);
            invariants::online_certificate(&objectives, &online, gs, r0_sq, VERIFY_TOL)?;
            let bounds = &side.certificates.per_iteration_bound;
            if bounds.len() != online.len() {
                return Err(violation("certificate", 0, "per-iteration bound has the wrong length".into()));
            }
            for (j, (&b, &c)) in bounds.iter().zip(&online).enumerate() {
                let expect = c * r0_sq / (2.0 * (j + 1) as f64);
                if !close(b, expect) {
                    return Err(violation("certificate", j + 1, format!("recorded bound {b:e}, recomputed {expect:e}")));
                }
            }
            ran.push("online-certificate");
        }
    }

    if side.termination == Termination::Optimal.as_str() {
        let f = side.certificates.fermat_residual;
        if !(f <= side.fermat_tolerance) {
            return Err(violation("fermat", len - 1, format!("residual {f:e} at an optimal endpoint")));
        }
        ran.push("fermat");
    }

    if side.solver == ModeArg::Fixed.solver_name() {
        if let Some(bound) = side.certificates.lipschitz_bound {
            let c = side.certificates.online_constant;
            if !(c <= bound * (1.0 + VERIFY_TOL)) {
                return Err(violation("lipschitz-bound", len - 1, format!("online constant {c:e} above {bound:e}")));
            }
            ran.push("lipschitz-bound");
        }
    }

    if let Some(eta) = side.eta {
        let known: Vec<Option<f64>> = problem.smooth().components().iter().map(|c| c.lipschitz()).collect();
        invariants::backtracking_cap(&alphas, &known, eta)?;
        ran.push("backtracking-cap");
    }

    if problem.kernel().structure() == KernelStructure::Nlp {
        invariants::feasibility(&problem, &iterates, VERIFY_TOL)?;
        ran.push("feasibility");
    }

    if !hash_ok {
        return Err(CliError::Mismatch("trace content hash differs from the sidecar".into()));
    }
    Ok(ran)
}
