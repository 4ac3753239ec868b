use multiprox_bench::generate_instance;
use multiprox_cli::{CliError, ComponentSpec, KernelSpec, ProblemFile, ProxSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[k][i] * a[k][j]).sum()).collect())
        .collect()
}

fn random_file(rng: &mut ChaCha8Rng) -> ProblemFile {
    let n = rng.random_range(1..4);
    let m = rng.random_range(1..4);
    let vec = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
    let prox = match rng.random_range(0..3) {
        0 => ProxSpec::Zero,
        1 => ProxSpec::L1 { weight: rng.random_range(0.0..1.0) },
        _ => ProxSpec::Box { lo: -3.0, hi: 3.0 },
    };
    let kernel = match rng.random_range(0..3) {
        0 => KernelSpec::Max,
        1 => KernelSpec::Nlp { prox },
        _ => KernelSpec::Separable { prox },
    };
    let m = if matches!(kernel, KernelSpec::Separable { .. }) { 1 } else { m };
    let components = (0..m)
        .map(|_| {
            if rng.random_bool(0.7) {
                let q = random_psd(rng, n);
                let b = vec(rng);
                ComponentSpec::Quadratic {
                    q,
                    b,
                    c: rng.random_range(-1.0..1.0),
                    lipschitz: None,
                }
            } else {
                ComponentSpec::Affine {
                    b: vec(rng),
                    c: rng.random_range(-1.0..1.0),
                }
            }
        })
        .collect();
    ProblemFile {
        kernel,
        components,
        x0: vec(rng),
        xbar: rng.random_bool(0.5).then(|| vec(rng)),
    }
}

#[test]
fn round_trip_is_field_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let file = random_file(&mut rng);
        let parsed = ProblemFile::parse(&file.to_json()).unwrap();
        assert_eq!(parsed, file);
        let again = ProblemFile::parse(&parsed.to_json()).unwrap();
        assert_eq!(again, parsed);
        assert_eq!(again.digest(), file.digest());

        let (a, b) = (file.build().unwrap(), again.build().unwrap());
        assert_eq!(a.smooth().len(), b.smooth().len());
        assert_eq!(a.kernel(), b.kernel());
        assert_eq!(a.curvature(), b.curvature());
        let x: Vec<f64> = (0..file.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert_eq!(a.eval_smooth(&x).unwrap(), b.eval_smooth(&x).unwrap());
    }
}

#[test]
fn identity_block_is_appended_for_prox_terms() {
    let quad = ComponentSpec::Quadratic {
        q: vec![vec![1.0, 0.0], vec![0.0, 3.0]],
        b: vec![0.0, 0.0],
        c: 0.0,
        lipschitz: None,
    };
    let file = |kernel| ProblemFile {
        kernel,
        components: vec![quad.clone()],
        x0: vec![0.0, 0.0],
        xbar: None,
    };
    let p = file(KernelSpec::Nlp { prox: ProxSpec::Zero }).build().unwrap();
    assert_eq!(p.smooth().len(), 1);
    let p = file(KernelSpec::Nlp { prox: ProxSpec::L1 { weight: 1.0 } }).build().unwrap();
    assert_eq!(p.smooth().len(), 3);
    let p = file(KernelSpec::Separable { prox: ProxSpec::Zero }).build().unwrap();
    assert_eq!(p.smooth().len(), 3);
    // L defaults to 2 λ_max(Q) and the identity block is affine
    assert_eq!(p.curvature().unwrap(), vec![6.0, 0.0, 0.0]);
}

#[test]
fn malformed_files_are_rejected() {
    let base = ProblemFile::parse(
        r#"{"kernel":{"type":"max"},
            "components":[{"type":"quadratic","q":[[2.0,1.0],[1.0,2.0]],"b":[0.0,0.0]}],
            "x0":[1.0,1.0]}"#,
    )
    .unwrap();
    assert_eq!(base.curvatures().unwrap(), vec![6.0]);

    let with = |q: Vec<Vec<f64>>, lipschitz: Option<f64>| ProblemFile {
        components: vec![ComponentSpec::Quadratic {
            q,
            b: vec![0.0, 0.0],
            c: 0.0,
            lipschitz,
        }],
        ..base.clone()
    };
    let bad = [
        with(vec![vec![1.0, 2.0], vec![2.0, 1.0]], None),
        with(vec![vec![1.0, 0.5], vec![0.0, 1.0]], None),
        with(vec![vec![1.0, 0.0]], None),
        with(vec![vec![2.0, 1.0], vec![1.0, 2.0]], Some(5.0)),
    ];
    for f in bad {
        assert!(matches!(f.build(), Err(CliError::Invalid(_))), "{f:?}");
    }
    // an eigenvalue within the PSD floor passes
    assert!(with(vec![vec![1.0, 1.0], vec![1.0, 1.0 - 1e-9]], None).build().is_ok());
    // declaring an upper bound on L is fine
    assert_eq!(with(vec![vec![2.0, 1.0], vec![1.0, 2.0]], Some(10.0)).curvatures().unwrap(), vec![10.0]);

    for text in [
        r#"{"kernel":{"type":"max"},"components":[],"x0":[1.0]}"#,
        r#"{"kernel":{"type":"max"},"components":[{"type":"affine","b":[1.0]}],"x0":[]}"#,
        r#"{"kernel":{"type":"separable"},"components":[{"type":"affine","b":[1.0]},{"type":"affine","b":[1.0]}],"x0":[1.0]}"#,
        r#"{"kernel":{"type":"nlp","prox":{"type":"box","lo":1.0,"hi":0.0}},"components":[{"type":"affine","b":[1.0]}],"x0":[1.0]}"#,
        r#"{"kernel":{"type":"max"},"components":[{"type":"affine","b":[1.0]}],"x0":[1.0],"xbar":[1.0,2.0]}"#,
    ] {
        assert!(matches!(ProblemFile::parse(text), Err(CliError::Invalid(_))), "{text}");
    }
    for text in [
        "[]",
        r#"{"kernel":{"type":"min"},"components":[],"x0":[1.0]}"#,
        r#"{"kernel":{"type":"max"},"components":[{"type":"affine","b":[1.0]}],"x0":[1.0],"extra":1}"#,
    ] {
        assert!(matches!(ProblemFile::parse(text), Err(CliError::Parse(_))), "{text}");
    }
}

#[test]
fn benchmark_instance_file_matches_the_instance() {
    let inst = generate_instance(12, 4, 3).unwrap();
    let file = ProblemFile::from(&inst);
    let parsed = ProblemFile::parse(&file.to_json()).unwrap();
    assert_eq!(parsed, file);
    let (a, b) = (inst.problem(), parsed.build().unwrap());
    assert_eq!(a.curvature(), b.curvature());
    let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
    assert_eq!(a.eval_smooth(&x).unwrap(), b.eval_smooth(&x).unwrap());
    assert_eq!(a.objective(&x).unwrap(), b.objective(&x).unwrap());
}
