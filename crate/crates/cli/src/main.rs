use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multiprox::Termination;
use multiprox_cli::{cmd_bench, cmd_solve, cmd_verify, BenchOptions, CliError, ModeArg, SolveOptions};

#[derive(Parser)]
#[command(name = "multiprox", version, about = "Multiproximal linearization solvers for min g(F(x))")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write a trace CSV with a JSON certificate sidecar.
    Solve(SolveArgs),
    /// Run the synthetic min-max benchmark.
    Bench(BenchArgs),
    /// Replay the invariant suite on a stored trace.
    Verify {
        trace: PathBuf,
        problem: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "fixed")]
    mode: ModeArg,
    /// Inflation factor of the backtracking mode.
    #[arg(long, default_value_t = 2.0)]
    eta: f64,
    /// Initial curvatures for backtracking, one per listed component.
    #[arg(long, value_delimiter = ',')]
    alpha0: Option<Vec<f64>>,
    /// Step tolerance; default 1e-9·(1 + ‖x‖).
    #[arg(long)]
    tol_step: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol_inner: f64,
    #[arg(long, default_value_t = 1e-7)]
    tol_fermat: f64,
    #[arg(long, default_value_t = 10_000)]
    max_outer: usize,
    /// Recorded in the seed column of the trace.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace CSV path; the sidecar goes next to it as `<stem>.cert.json`.
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
    /// Skip the reference solve behind x* and g*.
    #[arg(long)]
    no_reference: bool,
}

fn parse_n(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        Ok(n) => Err(format!("n must be at least 2, got {n}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_m(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(m) if m >= 2 => Ok(m),
        Ok(m) => Err(format!("m must be at least 2, got {m}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100, value_parser = parse_n)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [5, 10], value_parser = parse_m)]
    m: Vec<usize>,
    /// Number of seeds per m.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Only write the aggregate CSVs.
    #[arg(long)]
    summary_only: bool,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve(a) => {
            let opts = SolveOptions {
                mode: a.mode,
                eta: a.eta,
                alpha0: a.alpha0,
                tol_step: a.tol_step,
                tol_inner: a.tol_inner,
                tol_fermat: a.tol_fermat,
                max_outer: a.max_outer,
                seed: a.seed,
                out: a.out,
                reference: !a.no_reference,
            };
            let out = cmd_solve(&a.problem, &opts)?;
            let last = out.trace.last();
            println!(
                "{} after {} iterations, objective {:.12e}",
                out.trace.termination.as_str(),
                out.trace.len() - 1,
                last.objective
            );
            println!("x = {:?}", last.x);
            println!("trace written to {}", opts.out.display());
            Ok(match out.trace.termination {
                Termination::Optimal | Termination::StepTolerance => 0,
                Termination::MaxIterations => 1,
            })
        }
        Command::Bench(a) => {
            let opts = BenchOptions {
                n: a.n,
                m_list: a.m,
                seeds: a.seeds,
                seed: a.seed,
                iterations: a.iterations,
                workers: a.workers,
                out: a.out,
                traces: !a.summary_only,
            };
            let out = cmd_bench(&opts)?;
            println!("m\tsolver\tk\tmean%\tstd%\tcount");
            for r in &out.report.summary {
                println!("{}\t{}\t{}\t{:.4}\t{:.4}\t{}", r.m, r.solver, r.k, r.mean, r.std, r.count);
            }
            if !out.report.failures.is_empty() {
                println!("{} instance(s) failed, see failures.csv", out.report.failures.len());
            }
            println!("results written to {}", opts.out.display());
            Ok(0)
        }
        Command::Verify { trace, problem } => {
            let checks = cmd_verify(&trace, &problem)?;
            println!("ok: {}", checks.join(", "));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            match &e {
                CliError::Invariant(v) => eprintln!("error: invariant {} violated: {v}", v.name),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
