use multiprox::{Component, Kernel, Map, Problem};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::BenchError;

/// Synthetic min-max instance `min_x max_i xᵀQ_i x + b_iᵀx + c_i`.
///
/// `Q_i = Y_i D_i Y_i` with a Householder reflector `Y_i` and a shuffled
/// diagonal spectrum `{i·10^{j/(n−1)} : j = 1..n}` for `i < m`; `Q_m = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxInstance {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Row-major `n × n` matrices.
    pub q: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    /// `L_i = 2 λ_max(Q_i)`.
    pub lipschitz: Vec<f64>,
    /// Unit Householder vectors `ω_i/‖ω_i‖`, one per curved component.
    pub householder: Vec<Vec<f64>>,
    /// Diagonal of `D_i` in shuffled order, one per curved component.
    pub spectra: Vec<Vec<f64>>,
}

/// `Y D Y` with `Y = I − 2uuᵀ`, `‖u‖ = 1`.
fn reflect_diagonal(u: &[f64], d: &[f64]) -> Vec<f64> {
    let n = u.len();
    let udu: f64 = u.iter().zip(d).map(|(ui, di)| ui * ui * di).sum();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = -2.0 * u[i] * u[j] * (d[i] + d[j]) + 4.0 * u[i] * u[j] * udu;
            if i == j {
                v += d[i];
            }
            q[i * n + j] = v;
        }
    }
    q
}

/// Standard deviation of the entries of `b_i`.
pub const B_STD: f64 = 1.0 / 3.0;

/// Draw order: all `ω_i` (component-ascending, coordinate-ascending), then
/// the shuffles of the `D_i`, then all `b_i`. The stream is ChaCha20 seeded
/// from the 64-bit seed.
pub fn generate_instance(n: usize, m: usize, seed: u64) -> Result<MinMaxInstance, BenchError> {
    generate_instance_with_b_std(n, m, seed, B_STD)
}

/// As [`generate_instance`] with the entries of `b_i` drawn from
/// `N(0, b_std²)`.
pub fn generate_instance_with_b_std(n: usize, m: usize, seed: u64, b_std: f64) -> Result<MinMaxInstance, BenchError> {
    if n < 2 || m < 2 {
        return Err(BenchError::InvalidDimensions { n, m });
    }
    if !(b_std > 0.0 && b_std.is_finite()) {
        return Err(BenchError::InvalidScale(b_std));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let curved = m - 1;

    let householder: Vec<Vec<f64>> = (0..curved)
        .map(|_| {
            let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            w.into_iter().map(|v| v / norm).collect()
        })
        .collect();

    let spectra: Vec<Vec<f64>> = (1..=curved)
        .map(|i| {
            let mut d: Vec<f64> = (1..=n)
                .map(|j| i as f64 * 10f64.powf(j as f64 / (n - 1) as f64))
                .collect();
            d.shuffle(&mut rng);
            d
        })
        .collect();

    let normal = Normal::new(0.0, b_std).expect("valid normal");
    let b: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| normal.sample(&mut rng)).collect())
        .collect();

    let mut q: Vec<Vec<f64>> = householder
        .iter()
        .zip(&spectra)
        .map(|(u, d)| reflect_diagonal(u, d))
        .collect();
    q.push(vec![0.0; n * n]);

    let c = (1..=m).map(|i| 10f64.powf(2.0 * i as f64 / m as f64)).collect();
    let mut lipschitz: Vec<f64> = (1..=curved)
        .map(|i| 2.0 * i as f64 * 10f64.powf(n as f64 / (n - 1) as f64))
        .collect();
    lipschitz.push(0.0);

    Ok(MinMaxInstance {
        n,
        m,
        seed,
        q,
        b,
        c,
        lipschitz,
        householder,
        spectra,
    })
}

impl MinMaxInstance {
    /// The composite problem with the max kernel; the last component is
    /// affine.
    pub fn problem(&self) -> Problem {
        let mut comps: Vec<Component> = (0..self.m - 1)
            .map(|i| Component::quadratic(self.q[i].clone(), self.b[i].clone(), self.c[i], Some(self.lipschitz[i])))
            .collect();
        comps.push(Component::affine(self.b[self.m - 1].clone(), self.c[self.m - 1]));
        Problem::new(Map::new(self.n, comps).expect("consistent sizes"), Kernel::max(self.m))
            .expect("max kernel matches arity")
    }

    pub fn origin(&self) -> Vec<f64> {
        vec![0.0; self.n]
    }
}
