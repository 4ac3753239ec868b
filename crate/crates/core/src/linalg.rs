//! Small dense helpers. Vectors are slices, matrices are row-major `Vec`s.
//! Dimensions here are the number of components `m` (tens at most), so
//! nothing is blocked or vectorized.

use crate::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += s * x`
#[inline]
pub fn axpy<T: Scalar>(s: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

pub fn max_abs<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// `Σ_i w_i · rows[i]`
pub fn combine_rows<T: Scalar>(rows: &[Vec<T>], weights: &[T], dim: usize) -> Vec<T> {
    let mut out = vec![T::zero(); dim];
    for (row, &w) in rows.iter().zip(weights) {
        if w != T::zero() {
            axpy(w, row, &mut out);
        }
    }
    out
}

/// Solves the square system `a · x = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major `k × k`. Returns `None` when a pivot falls below
/// `rel_pivot · max|a_ij|`.
pub fn solve_dense<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, rel_pivot: T) -> Option<Vec<T>> {
    let k = b.len();
    debug_assert_eq!(a.len(), k * k);
    let scale = max_abs(&a);
    if k == 0 {
        return Some(b);
    }
    if scale == T::zero() || !scale.is_finite() {
        return None;
    }
    let floor = rel_pivot * scale;
    for col in 0..k {
        let mut piv = col;
        let mut best = a[col * k + col].abs();
        for r in col + 1..k {
            let v = a[r * k + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= floor {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            b.swap(col, piv);
        }
        let p = a[col * k + col];
        for r in col + 1..k {
            let f = a[r * k + col] / p;
            if f == T::zero() {
                continue;
            }
            for c in col..k {
                let v = a[col * k + c];
                a[r * k + c] -= f * v;
            }
            let bc = b[col];
            b[r] -= f * bc;
        }
    }
    let mut x = vec![T::zero(); k];
    for r in (0..k).rev() {
        let mut s = b[r];
        for c in r + 1..k {
            s -= a[r * k + c] * x[c];
        }
        x[r] = s / a[r * k + r];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Operator (spectral) norm of the matrix whose rows are `rows`, by power
/// iteration on `AᵀA`. Stops after `max_iter` sweeps or when the estimate
/// changes by at most `rel_tol` relatively.
pub fn operator_norm<T: Scalar>(rows: &[Vec<T>], dim: usize, max_iter: usize, rel_tol: T) -> T {
    if rows.is_empty() || dim == 0 {
        return T::zero();
    }
    // deterministic start with no symmetry, so it is unlikely to be orthogonal
    // to the leading right singular vector
    let mut v: Vec<T> = (0..dim)
        .map(|j| T::one() + T::lit(0.1) * T::from_count(j % 7))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut estimate = T::zero();
    for _ in 0..max_iter {
        let av: Vec<T> = rows.iter().map(|r| dot(r, &v)).collect();
        let mut w = vec![T::zero(); dim];
        for (r, &s) in rows.iter().zip(&av) {
            axpy(s, r, &mut w);
        }
        let nw = norm(&w);
        if nw == T::zero() {
            return T::zero();
        }
        let next = nw.sqrt();
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
        let done = (next - estimate).abs() <= rel_tol * next;
        estimate = next;
        if done {
            break;
        }
    }
    // ‖A v‖ for the converged unit v is a lower bound that matches the norm
    let av: Vec<T> = rows.iter().map(|r| dot(r, &v)).collect();
    norm(&av).max(estimate)
}
