mod common;

use multiprox::diagnostics::sdist;
use multiprox::{
    multiprox_run, CompositeProblem, Component, Kernel, Map, NlpKernel, OuterKernel, Prox, SmoothComponent,
    SmoothMap, SolverConfig, Termination,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random PSD `n × n` matrix `AᵀA/n` with its `L = 2 λ_max` bounded by
/// `2‖A‖_F²/n`.
fn random_quadratic(rng: &mut ChaCha8Rng, n: usize) -> Component {
    let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum::<f64>() / n as f64;
        }
    }
    let fro: f64 = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Component::quadratic(q, b, rng.random_range(-1.0..1.0), Some(2.0 * fro))
}

fn components(rng: &mut ChaCha8Rng, n: usize) -> Vec<Component> {
    let mut out: Vec<Component> = (0..3).map(|_| random_quadratic(rng, n)).collect();
    out.push(Component::affine((0..n).map(|_| rng.random_range(-1.0..1.0)).collect(), 0.5));
    out.push(Component::coordinate(1, n));
    out
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 4;
    for c in components(&mut rng, n) {
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = c.gradient(&x);
            let h = 1e-6;
            let fd: Vec<f64> = (0..n)
                .map(|j| {
                    let mut p = x.clone();
                    let mut m = x.clone();
                    p[j] += h;
                    m[j] -= h;
                    (c.value(&p) - c.value(&m)) / (2.0 * h)
                })
                .collect();
            let err: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(err <= 1e-5 * scale.max(1.0), "gradient error {err}");
        }
    }
}

#[test]
fn declared_constants_majorize_and_components_are_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 3;
    for c in components(&mut rng, n) {
        let l = c.lipschitz().unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let fx = c.value(&x);
            let fy = c.value(&y);
            let g = c.gradient(&x);
            let lin = fx + g.iter().zip(y.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum::<f64>();
            let d2: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(fy <= lin + l / 2.0 * d2 + 1e-8 * (1.0 + fy.abs()));
            assert!(fy >= lin - 1e-8 * (1.0 + fy.abs()));
        }
    }
}

#[test]
fn model_is_tangent_at_its_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let map = Map::new(3, components(&mut rng, 3)).unwrap();
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mv = multiprox::Model::build(&map, &x, vec![1.0; 5]).unwrap();
        assert_eq!(mv.eval(&x), map.eval(&x).unwrap());
    }
}

#[test]
fn solver_runs_in_single_precision() {
    let f = SmoothComponent::<f32>::from_fns(|x: &[f32]| x[0] * x[0], |x: &[f32]| vec![2.0 * x[0]], Some(2.0));
    let g = SmoothComponent::<f32>::from_fns(
        |x: &[f32]| (x[0] - 1.0) * (x[0] - 1.0),
        |x: &[f32]| vec![2.0 * (x[0] - 1.0)],
        Some(2.0),
    );
    let p = CompositeProblem::new(SmoothMap::new(1, vec![f, g]).unwrap(), OuterKernel::max(2)).unwrap();
    let cfg = SolverConfig::<f32> {
        fermat_tolerance: 1e-4,
        ..SolverConfig::default()
    };
    let t = multiprox_run(&p, &[0.0f32], &cfg).unwrap();
    assert!((t.last().x[0] - 0.5).abs() < 1e-5);
    assert_eq!(t.termination, Termination::Optimal);
}

proptest! {
    #[test]
    fn sdist_is_monotone_on_constraint_coordinates(
        z in proptest::collection::vec(-3.0f64..3.0, 4),
        d in proptest::collection::vec(0.0f64..2.0, 3),
    ) {
        let k = Kernel::Nlp(NlpKernel::new(3, Prox::Zero, 0));
        let mut w = z.clone();
        for i in 0..3 {
            w[1 + i] += d[i];
        }
        prop_assert!(sdist(&z, &k).unwrap() >= sdist(&w, &k).unwrap() - 1e-15);
    }

    #[test]
    fn sdist_with_box_is_monotone(
        z in proptest::collection::vec(-2.0f64..2.0, 4),
        d in proptest::collection::vec(0.0f64..2.0, 2),
    ) {
        // z = (z₀, z₁, z₂, identity block of length 1) with a box on the block
        let k = Kernel::Nlp(NlpKernel::new(2, Prox::boxed(-1.0, 1.0), 1));
        let mut w = z.clone();
        w[1] += d[0];
        w[2] += d[1];
        prop_assert!(sdist(&z, &k).unwrap() >= sdist(&w, &k).unwrap() - 1e-15);
    }
}
