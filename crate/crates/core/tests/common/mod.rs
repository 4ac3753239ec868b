#![allow(dead_code)]

use multiprox::{Component, Kernel, Map, NlpKernel, Problem, Prox};

/// `y ↦ (y − c)²` in one dimension, `L = 2`.
pub fn shifted_square(c: f64) -> Component {
    Component::from_fns(
        move |x: &[f64]| (x[0] - c).powi(2),
        move |x: &[f64]| vec![2.0 * (x[0] - c)],
        Some(2.0),
    )
}

pub fn square_problem() -> Problem {
    Problem::new(Map::new(1, vec![shifted_square(0.0)]).unwrap(), Kernel::max(1)).unwrap()
}

pub fn two_quadratics() -> Problem {
    Problem::new(
        Map::new(1, vec![shifted_square(0.0), shifted_square(1.0)]).unwrap(),
        Kernel::max(2),
    )
    .unwrap()
}

/// minimize `y` subject to `y² − 1 ≤ 0`.
pub fn nlp_toy() -> Problem {
    let obj = Component::affine(vec![1.0], 0.0);
    let con = Component::quadratic(vec![1.0], vec![0.0], -1.0, Some(2.0));
    Problem::new(
        Map::new(1, vec![obj, con]).unwrap(),
        Kernel::Nlp(NlpKernel::new(1, Prox::Zero, 0)),
    )
    .unwrap()
}

/// Minimum of a convex function on a box by a coarse grid followed by
/// repeated zooming around the incumbent (window of a tenth of the grid on
/// each side). Infeasible points return `+∞`.
pub fn grid_min(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], per_axis: usize, levels: usize) -> (Vec<f64>, f64) {
    let dim = lo.len();
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let mut best = (lo.clone(), f64::INFINITY);
    for _ in 0..levels {
        let steps: Vec<f64> = (0..dim).map(|j| (hi[j] - lo[j]) / per_axis as f64).collect();
        let total = (per_axis + 1).pow(dim as u32);
        let mut p = vec![0.0; dim];
        for idx in 0..total {
            let mut r = idx;
            for j in 0..dim {
                p[j] = lo[j] + (r % (per_axis + 1)) as f64 * steps[j];
                r /= per_axis + 1;
            }
            let v = f(&p);
            if v < best.1 {
                best = (p.clone(), v);
            }
        }
        for j in 0..dim {
            let w = steps[j] * (per_axis / 10).max(2) as f64;
            lo[j] = best.0[j] - w;
            hi[j] = best.0[j] + w;
        }
    }
    best
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
