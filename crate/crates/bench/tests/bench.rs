use multiprox::diagnostics::invariants;
use multiprox::{multiprox_run, Component, Config, Kernel, Map, Problem};
use multiprox_bench::{
    generate_instance, normalized_gap, reference_solution, run_table1, BenchError, Solver, Table1Config,
};
use nalgebra::DMatrix;

#[test]
fn constants_of_generated_instances() {
    let inst = generate_instance(100, 5, 7).unwrap();
    assert_eq!(inst.c[4], 100.0);
    assert!((inst.lipschitz[0] - 2.0 * 10f64.powf(100.0 / 99.0)).abs() < 1e-12);
    assert!((inst.lipschitz[0] - 20.47).abs() < 5e-3);
    assert_eq!(inst.lipschitz[4], 0.0);
    assert!(inst.q[4].iter().all(|&v| v == 0.0));
    let p = inst.problem();
    let z = p.eval_smooth(&inst.origin()).unwrap();
    for (i, zi) in z.iter().enumerate() {
        assert_eq!(*zi, 10f64.powf(2.0 * (i + 1) as f64 / 5.0));
    }
}

#[test]
fn householder_factors_are_orthogonal_and_preserve_spectra() {
    let n = 30;
    let inst = generate_instance(n, 4, 3).unwrap();
    for i in 0..3 {
        let u = DMatrix::from_column_slice(n, 1, &inst.householder[i]);
        let y = DMatrix::<f64>::identity(n, n) - (&u * u.transpose()) * 2.0;
        let err = (y.transpose() * &y - DMatrix::<f64>::identity(n, n)).abs().max();
        assert!(err < 1e-12);
        let q = DMatrix::from_row_slice(n, n, &inst.q[i]);
        let mut eig: Vec<f64> = q.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let mut spec = inst.spectra[i].clone();
        spec.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&spec) {
            assert!((a - b).abs() < 1e-10 * b.max(1.0));
        }
        let top = spec.last().unwrap();
        assert!((2.0 * top - inst.lipschitz[i]).abs() < 1e-12 * top);
    }
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(generate_instance(20, 5, 42).unwrap(), generate_instance(20, 5, 42).unwrap());
    assert_ne!(generate_instance(20, 5, 42).unwrap().b, generate_instance(20, 5, 43).unwrap().b);
}

#[test]
fn invalid_dimensions() {
    assert_eq!(generate_instance(1, 5, 0).unwrap_err(), BenchError::InvalidDimensions { n: 1, m: 5 });
    assert!(generate_instance(10, 1, 0).is_err());
}

fn sq(c: f64) -> Component {
    Component::from_fns(
        move |x: &[f64]| (x[0] - c).powi(2),
        move |x: &[f64]| vec![2.0 * (x[0] - c)],
        Some(2.0),
    )
}

#[test]
fn reference_solutions_of_small_problems() {
    let two = Problem::new(Map::new(1, vec![sq(0.0), sq(1.0)]).unwrap(), Kernel::max(2)).unwrap();
    let r = reference_solution(&two, &[0.0], 1e-10).unwrap();
    assert!((r.xstar[0] - 0.5).abs() < 1e-10);
    assert!((r.gstar - 0.25).abs() < 1e-12);
    let one = Problem::new(Map::new(1, vec![sq(0.0)]).unwrap(), Kernel::max(1)).unwrap();
    let r = reference_solution(&one, &[3.0], 1e-10).unwrap();
    assert_eq!(r.xstar, vec![0.0]);
    assert_eq!(r.gstar, 0.0);
}

#[test]
fn reference_is_reproducible() {
    let inst = generate_instance(20, 5, 9).unwrap();
    let a = reference_solution(&inst.problem(), &inst.origin(), 1e-10).unwrap();
    let b = reference_solution(&inst.problem(), &inst.origin(), 1e-10).unwrap();
    assert_eq!(a, b);
    assert!(a.fermat <= 1e-10);
}

#[test]
fn normalized_gap_examples() {
    let one = Problem::new(Map::new(1, vec![sq(0.0)]).unwrap(), Kernel::max(1)).unwrap();
    let t = multiprox_run(&one, &[3.0], &Config::default()).unwrap();
    let g = normalized_gap(&t.objectives(), 0.0).unwrap();
    assert_eq!(g[0], 100.0);
    assert_eq!(g[1], 0.0);
    assert_eq!(normalized_gap(&[1.0, 1.0], 1.0).unwrap_err(), BenchError::DegenerateGap);
}

#[test]
fn small_table_runs_and_keeps_invariants() {
    let cfg = Table1Config {
        n: 20,
        m_list: vec![3, 5],
        seeds: (0..3).collect(),
        iterations: 60,
        workers: Some(2),
        ..Table1Config::default()
    };
    let report = run_table1(&cfg).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    assert_eq!(report.cells.len(), 2 * 2 * 3);
    assert_eq!(report.summary.len(), 2 * 2 * 2);
    for cell in &report.cells {
        invariants::descent(&cell.objectives(), 1e-9).unwrap();
        assert_eq!(cell.rows[0].normalized_gap_percent, 100.0);
    }
    assert!(report.mean_gap(5, Solver::Multiprox, 10).unwrap() < report.mean_gap(5, Solver::Pgnm, 10).unwrap());

    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("m,seed,solver,k,normalized_gap_percent,objective,step_norm,online_constant\n"));
    let rows: usize = report.cells.iter().map(|c| c.rows.len()).sum();
    assert_eq!(text.lines().count(), rows + 1);
}
