//! Structured outer kernels `g`: coordinatewise maximum, the NLP kernel
//! `z₀ + Σ ι(z_i ≤ 0) + h(z)` and the separable kernel `a + h(z)`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::Extended;
use crate::prox::ProxFriendly;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelStructure {
    Max,
    Nlp,
    Separable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxKernel {
    pub arity: usize,
}

/// `g(z₀, z₁…z_m, z) = z₀ + Σ_i ι_{R₋}(z_i) + h(z)`. The trailing block has
/// `prox_dim` coordinates and must be fed by the identity map; it is empty
/// when `h = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlpKernel<T> {
    pub constraints: usize,
    pub prox: ProxFriendly<T>,
    pub prox_dim: usize,
}

impl<T: Scalar> NlpKernel<T> {
    pub fn new(constraints: usize, prox: ProxFriendly<T>, prox_dim: usize) -> Self {
        assert!(
            prox_dim > 0 || prox.is_zero(),
            "a nonzero prox term needs its identity block"
        );
        Self {
            constraints,
            prox,
            prox_dim,
        }
    }
}

/// `g(a, z) = a + h(z)`, fed by `F(x) = (f(x), x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableKernel<T> {
    pub dim: usize,
    pub prox: ProxFriendly<T>,
}

impl<T: Scalar> SeparableKernel<T> {
    pub fn new(dim: usize, prox: ProxFriendly<T>) -> Self {
        Self { dim, prox }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OuterKernel<T> {
    Max(MaxKernel),
    Nlp(NlpKernel<T>),
    Separable(SeparableKernel<T>),
}

fn tie_tolerance<T: Scalar>(top: T) -> T {
    T::lit(1e-12) * T::one().max(top.abs())
}

impl<T: Scalar> OuterKernel<T> {
    pub fn max(arity: usize) -> Self {
        OuterKernel::Max(MaxKernel { arity })
    }

    pub fn structure(&self) -> KernelStructure {
        match self {
            OuterKernel::Max(_) => KernelStructure::Max,
            OuterKernel::Nlp(_) => KernelStructure::Nlp,
            OuterKernel::Separable(_) => KernelStructure::Separable,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            OuterKernel::Max(k) => k.arity,
            OuterKernel::Nlp(k) => 1 + k.constraints + k.prox_dim,
            OuterKernel::Separable(k) => 1 + k.dim,
        }
    }

    /// Whether `g` is declared nondecreasing in coordinate `i`.
    pub fn is_monotone(&self, i: usize) -> bool {
        match self {
            OuterKernel::Max(k) => i < k.arity,
            OuterKernel::Nlp(k) => i < 1 + k.constraints,
            OuterKernel::Separable(_) => i == 0,
        }
    }

    /// Indices of the inequality block `z_i ≤ 0` (empty unless NLP).
    pub fn constraint_block(&self) -> Range<usize> {
        match self {
            OuterKernel::Nlp(k) => 1..1 + k.constraints,
            _ => 0..0,
        }
    }

    /// Indices of the identity block carrying the prox term, if any.
    pub fn identity_block(&self) -> Option<Range<usize>> {
        match self {
            OuterKernel::Nlp(k) if k.prox_dim > 0 => {
                Some(1 + k.constraints..1 + k.constraints + k.prox_dim)
            }
            OuterKernel::Separable(k) => Some(1..1 + k.dim),
            _ => None,
        }
    }

    pub fn prox_term(&self) -> Option<&ProxFriendly<T>> {
        match self {
            OuterKernel::Max(_) => None,
            OuterKernel::Nlp(k) => Some(&k.prox),
            OuterKernel::Separable(k) => Some(&k.prox),
        }
    }

    fn check_arity(&self, z: &[T]) -> Result<()> {
        if z.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// `g(z)`; `+∞` outside `dom g`.
    pub fn value(&self, z: &[T]) -> Result<Extended<T>> {
        self.check_arity(z)?;
        Ok(match self {
            OuterKernel::Max(_) => {
                Extended::Finite(z.iter().copied().fold(T::neg_infinity(), T::max))
            }
            OuterKernel::Nlp(k) => {
                if z[1..1 + k.constraints].iter().any(|&c| c > T::zero()) {
                    Extended::PosInfinity
                } else {
                    match k.prox.value(&z[1 + k.constraints..]) {
                        Extended::Finite(h) => Extended::Finite(z[0] + h),
                        Extended::PosInfinity => Extended::PosInfinity,
                    }
                }
            }
            OuterKernel::Separable(k) => match k.prox.value(&z[1..]) {
                Extended::Finite(h) => Extended::Finite(z[0] + h),
                Extended::PosInfinity => Extended::PosInfinity,
            },
        })
    }

    pub fn in_domain(&self, z: &[T]) -> Result<bool> {
        Ok(self.value(z)?.is_finite())
    }

    /// One selected element of `∂g(z)`. For the max kernel the weights are
    /// uniform over the (relative 1e−12) argmax set; indicator parts
    /// contribute their zero normal vector.
    pub fn subgradient(&self, z: &[T]) -> Result<Vec<T>> {
        if !self.value(z)?.is_finite() {
            return Err(Error::DomainViolation);
        }
        Ok(match self {
            OuterKernel::Max(_) => {
                let top = z.iter().copied().fold(T::neg_infinity(), T::max);
                let tol = tie_tolerance(top);
                let active: Vec<bool> = z.iter().map(|&v| v >= top - tol).collect();
                let count = T::from_count(active.iter().filter(|&&a| a).count());
                active
                    .iter()
                    .map(|&a| if a { T::one() / count } else { T::zero() })
                    .collect()
            }
            OuterKernel::Nlp(k) => {
                let mut lambda = vec![T::zero(); self.arity()];
                lambda[0] = T::one();
                let tail = k
                    .prox
                    .subgradient(&z[1 + k.constraints..])
                    .ok_or(Error::DomainViolation)?;
                lambda[1 + k.constraints..].copy_from_slice(&tail);
                lambda
            }
            OuterKernel::Separable(k) => {
                let mut lambda = vec![T::one()];
                lambda.extend(k.prox.subgradient(&z[1..]).ok_or(Error::DomainViolation)?);
                lambda
            }
        })
    }

    /// Lipschitz constant of `g` on its domain (Euclidean norm).
    pub fn lipschitz(&self) -> Extended<T> {
        match self {
            OuterKernel::Max(_) => Extended::Finite(T::one()),
            OuterKernel::Nlp(k) => match k.prox.lipschitz(k.prox_dim) {
                Extended::Finite(lh) => Extended::Finite(T::one() + lh),
                Extended::PosInfinity => Extended::PosInfinity,
            },
            OuterKernel::Separable(k) => match k.prox.lipschitz(k.dim) {
                Extended::Finite(lh) => Extended::Finite((T::one() + lh * lh).sqrt()),
                Extended::PosInfinity => Extended::PosInfinity,
            },
        }
    }
}
