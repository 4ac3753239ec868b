use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multiprox_cli::{sidecar_path, TraceFile};
use tempfile::TempDir;

const TWO_QUADRATICS: &str = r#"{
  "kernel": {"type": "max"},
  "components": [
    {"type": "quadratic", "q": [[1.0]], "b": [0.0]},
    {"type": "quadratic", "q": [[1.0]], "b": [-2.0], "c": 1.0}
  ],
  "x0": [3.0]
}"#;

// minimize y subject to y² ≤ 1
const BALL_NLP: &str = r#"{
  "kernel": {"type": "nlp"},
  "components": [
    {"type": "affine", "b": [1.0]},
    {"type": "quadratic", "q": [[1.0]], "b": [0.0], "c": -1.0}
  ],
  "x0": [0.5],
  "xbar": [0.0]
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multiprox"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn solve(problem: &Path, out: &Path, extra: &[&str]) -> (i32, String, String) {
    run(bin().arg("solve").arg(problem).arg("--out").arg(out).args(extra))
}

fn verify(trace: &Path, problem: &Path) -> (i32, String, String) {
    run(bin().arg("verify").arg(trace).arg(problem))
}

#[test]
fn two_quadratics_reach_one_half() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "two.json", TWO_QUADRATICS);
    let out = dir.path().join("two.csv");
    let (code, stdout, stderr) = solve(&p, &out, &[]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let (file, ok) = TraceFile::read(&out).unwrap();
    assert!(ok);
    let x = file.sidecar.iterates.last().unwrap()[0];
    assert!((x - 0.5).abs() <= 1e-9, "x = {x}");
    assert_eq!(file.sidecar.termination, "optimal");
    assert!(file.rows.len() - 1 <= 3);
}

#[test]
fn pgnm_trace_equals_fixed_trace_under_uniform_curvature() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "two.json", TWO_QUADRATICS);
    let a = dir.path().join("fixed.csv");
    let b = dir.path().join("pgnm.csv");
    assert_eq!(solve(&p, &a, &[]).0, 0);
    assert_eq!(solve(&p, &b, &["--mode", "pgnm"]).0, 0);
    let (fa, _) = TraceFile::read(&a).unwrap();
    let (fb, _) = TraceFile::read(&b).unwrap();
    assert_eq!(fa.sidecar.iterates, fb.sidecar.iterates);
    assert_eq!(fa.sidecar.alphas, fb.sidecar.alphas);
    let obj = |f: &TraceFile| f.rows.iter().map(|r| r.objective).collect::<Vec<_>>();
    assert_eq!(obj(&fa), obj(&fb));
}

#[test]
fn trace_has_one_row_per_iterate_and_verifies() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "nlp.json", BALL_NLP);
    for mode in ["fixed", "backtracking"] {
        let out = dir.path().join(format!("{mode}.csv"));
        let (code, _, stderr) = solve(&p, &out, &["--mode", mode]);
        assert_eq!(code, 0, "{stderr}");
        let text = fs::read_to_string(&out).unwrap();
        let (file, _) = TraceFile::read(&out).unwrap();
        assert_eq!(text.lines().count(), file.sidecar.iterates.len() + 1);
        assert!(text.starts_with("m,seed,solver,k,normalized_gap_percent,objective,step_norm,online_constant"));
        let (code, stdout, stderr) = verify(&out, &p);
        assert_eq!(code, 0, "{stdout}{stderr}");
        assert!(stdout.contains("feasibility"));
    }
}

#[test]
fn infeasible_start_exits_3() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "bad.json", &BALL_NLP.replace("[0.5]", "[2.0]"));
    let (code, _, stderr) = solve(&p, &dir.path().join("t.csv"), &[]);
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("garbled.json", "{ not json"),
        ("indefinite.json", &*TWO_QUADRATICS.replace("[[1.0]], \"b\": [0.0]", "[[-1.0]], \"b\": [0.0]")),
        ("short_b.json", &*TWO_QUADRATICS.replace("[-2.0]", "[-2.0, 1.0]")),
    ];
    for (name, text) in cases {
        let p = write(dir.path(), name, text);
        let (code, _, stderr) = solve(&p, &dir.path().join("t.csv"), &[]);
        assert_eq!(code, 2, "{name}: {stderr}");
    }
    let (code, _, _) = solve(&dir.path().join("missing.json"), &dir.path().join("t.csv"), &[]);
    assert_eq!(code, 2);
}

#[test]
fn pgnm_on_constrained_kernel_is_rejected() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "nlp.json", BALL_NLP);
    let (code, _, _) = solve(&p, &dir.path().join("t.csv"), &["--mode", "pgnm"]);
    assert_eq!(code, 2);
}

#[test]
fn fresh_trace_verifies() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "two.json", TWO_QUADRATICS);
    let out = dir.path().join("t.csv");
    solve(&p, &out, &[]);
    let (code, stdout, stderr) = verify(&out, &p);
    assert_eq!(code, 0, "{stdout}{stderr}");
    for check in ["descent", "majorization", "fejer", "online-certificate", "fermat"] {
        assert!(stdout.contains(check), "{check} missing from {stdout}");
    }
}

/// Replaces the objective column of row `k` (1-based data row).
fn corrupt_objective(path: &Path, k: usize, value: &str) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cols: Vec<String> = lines[k + 1].split(',').map(str::to_string).collect();
    cols[5] = value.to_string();
    lines[k + 1] = cols.join(",");
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn corrupted_objective_names_descent() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "two.json", TWO_QUADRATICS);
    let out = dir.path().join("t.csv");
    solve(&p, &out, &[]);
    corrupt_objective(&out, 1, "50.0");
    let (code, _, stderr) = verify(&out, &p);
    assert_eq!(code, 6);
    assert!(stderr.contains("descent"), "{stderr}");
}

#[test]
fn corrupted_but_decreasing_objective_is_caught_by_recomputation() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "two.json", TWO_QUADRATICS);
    let out = dir.path().join("t.csv");
    solve(&p, &out, &[]);
    corrupt_objective(&out, 1, "0.1");
    let (code, _, stderr) = verify(&out, &p);
    assert_eq!(code, 6);
    assert!(stderr.contains("objective"), "{stderr}");
}

#[test]
fn hash_mismatches_exit_5() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "two.json", TWO_QUADRATICS);
    let out = dir.path().join("t.csv");
    solve(&p, &out, &[]);

    let other = write(dir.path(), "other.json", &TWO_QUADRATICS.replace("[3.0]", "[3.5]"));
    assert_eq!(verify(&out, &other).0, 5);

    // reformatting the problem file keeps its identity
    let compact = write(dir.path(), "compact.json", &TWO_QUADRATICS.replace(['\n', ' '], ""));
    assert_eq!(verify(&out, &compact).0, 0);

    // a byte change that keeps every invariant intact
    let text = fs::read_to_string(&out).unwrap();
    fs::write(&out, text.replacen(",0,multiprox,", ",7,multiprox,", 1)).unwrap();
    assert_eq!(verify(&out, &p).0, 5);
}

#[test]
fn missing_sidecar_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "two.json", TWO_QUADRATICS);
    let out = dir.path().join("t.csv");
    solve(&p, &out, &[]);
    fs::remove_file(sidecar_path(&out)).unwrap();
    assert_eq!(verify(&out, &p).0, 2);
}

#[test]
fn bench_rejects_m_of_one() {
    let dir = TempDir::new().unwrap();
    let (code, _, stderr) = run(bin().args(["bench", "--m", "1", "--out"]).arg(dir.path()));
    assert_eq!(code, 2, "{stderr}");
    let (code, _, _) = run(bin().args(["bench", "--m", "5,1", "--out"]).arg(dir.path()));
    assert_eq!(code, 2);
}

#[test]
fn bench_ci_profile_writes_verifiable_traces() {
    let dir = TempDir::new().unwrap();
    let (code, stdout, stderr) = run(bin()
        .args(["bench", "--n", "20", "--m", "5", "--seeds", "5", "--workers", "2", "--out"])
        .arg(dir.path()));
    assert_eq!(code, 0, "{stdout}{stderr}");
    for name in ["bench.csv", "summary.csv", "failures.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let mut count = 0;
    for seed in 0..5 {
        let problem = dir.path().join(format!("problem_m5_seed{seed}.json"));
        for solver in ["multiprox", "pgnm"] {
            let trace = dir.path().join(format!("trace_m5_seed{seed}_{solver}.csv"));
            let (code, stdout, stderr) = verify(&trace, &problem);
            assert_eq!(code, 0, "{}: {stdout}{stderr}", trace.display());
            assert!(stdout.contains("descent"));
            count += 1;
        }
    }
    assert_eq!(count, 10);
}
