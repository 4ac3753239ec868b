//! Prox-friendly terms `h` carried by the NLP and separable kernels.

use crate::model::Extended;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProxFriendly<T> {
    Zero,
    /// `w‖z‖₁`
    L1 { weight: T },
    /// Indicator of `[lo, hi]ⁿ`.
    Box { lo: T, hi: T },
}

impl<T: Scalar> ProxFriendly<T> {
    pub fn l1(weight: T) -> Self {
        assert!(weight >= T::zero(), "ℓ1 weight must be nonnegative");
        ProxFriendly::L1 { weight }
    }

    pub fn boxed(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "empty box");
        ProxFriendly::Box { lo, hi }
    }

    pub fn value(&self, z: &[T]) -> Extended<T> {
        match *self {
            ProxFriendly::Zero => Extended::Finite(T::zero()),
            ProxFriendly::L1 { weight } => {
                Extended::Finite(weight * z.iter().fold(T::zero(), |a, v| a + v.abs()))
            }
            ProxFriendly::Box { lo, hi } => {
                if z.iter().all(|&v| v >= lo && v <= hi) {
                    Extended::Finite(T::zero())
                } else {
                    Extended::PosInfinity
                }
            }
        }
    }

    /// `prox_{t·h}(v) = argmin_p h(p) + ‖p − v‖²/(2t)`, `t > 0`.
    pub fn prox(&self, v: &[T], t: T) -> Vec<T> {
        match *self {
            ProxFriendly::Zero => v.to_vec(),
            ProxFriendly::L1 { weight } => {
                let thr = weight * t;
                v.iter()
                    .map(|&x| {
                        if x > thr {
                            x - thr
                        } else if x < -thr {
                            x + thr
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            }
            ProxFriendly::Box { lo, hi } => v.iter().map(|&x| x.max(lo).min(hi)).collect(),
        }
    }

    /// Coordinates on which the prox map is locally the identity-plus-shift
    /// (its Jacobian is 1 there and 0 elsewhere).
    pub(crate) fn prox_free_mask(&self, v: &[T], t: T) -> Vec<bool> {
        match *self {
            ProxFriendly::Zero => vec![true; v.len()],
            ProxFriendly::L1 { weight } => {
                let thr = weight * t;
                v.iter().map(|&x| x.abs() > thr).collect()
            }
            ProxFriendly::Box { lo, hi } => v.iter().map(|&x| x > lo && x < hi).collect(),
        }
    }

    /// One element of `∂h(z)`: `w·sign(z)` for ℓ1 (0 at 0), the zero normal
    /// vector for the box.
    pub fn subgradient(&self, z: &[T]) -> Option<Vec<T>> {
        match *self {
            ProxFriendly::Zero => Some(vec![T::zero(); z.len()]),
            ProxFriendly::L1 { weight } => Some(
                z.iter()
                    .map(|&x| {
                        if x > T::zero() {
                            weight
                        } else if x < T::zero() {
                            -weight
                        } else {
                            T::zero()
                        }
                    })
                    .collect(),
            ),
            ProxFriendly::Box { .. } => {
                if self.value(z).is_finite() {
                    Some(vec![T::zero(); z.len()])
                } else {
                    None
                }
            }
        }
    }

    /// Euclidean Lipschitz constant of `h` on `R^dim`; `+∞` for the box
    /// indicator.
    pub fn lipschitz(&self, dim: usize) -> Extended<T> {
        match *self {
            ProxFriendly::Zero => Extended::Finite(T::zero()),
            ProxFriendly::L1 { weight } => Extended::Finite(weight * T::from_count(dim).sqrt()),
            ProxFriendly::Box { .. } => Extended::PosInfinity,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ProxFriendly::Zero)
    }
}
