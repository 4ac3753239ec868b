use crate::error::{Error, Result};
use crate::Scalar;

/// Euclidean projection onto the unit simplex `{ν ≥ 0, Σν = 1}`.
///
/// Sort-based: with `u` sorted decreasingly, the threshold is
/// `τ = (Σ_{r≤ρ} u_r − 1)/ρ` for the largest `ρ` with `u_ρ > τ_ρ`, and the
/// projection is `max(v − τ, 0)`.
pub fn project_simplex<T: Scalar>(v: &[T]) -> Result<Vec<T>> {
    if v.is_empty() {
        return Err(Error::Empty("cannot project an empty vector onto the simplex"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { component: 0 });
    }
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumsum = T::zero();
    let mut tau = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - T::one()) / T::from_count(j + 1);
        if uj > candidate {
            tau = candidate;
        } else {
            break;
        }
    }
    Ok(v.iter().map(|&x| (x - tau).max(T::zero())).collect())
}
