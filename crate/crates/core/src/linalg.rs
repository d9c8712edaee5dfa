//! Dense vector kernels over slices.
//!
//! Checked entry points (`dot`, `sub`) validate lengths and return
//! [`Error::Dimension`](crate::Error::Dimension); the `*_unchecked` style kernels used in hot loops
//! only `debug_assert!` the contract.

use crate::error::{check_dim, Result};
use crate::scalar::Real;

pub type Vector<T> = Vec<T>;

/// Inner product `Σ u_i v_i`.
pub fn dot<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    check_dim(u.len(), v.len())?;
    Ok(dot_raw(u, v))
}

#[inline]
pub(crate) fn dot_raw<T: Real>(u: &[T], v: &[T]) -> T {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

/// Euclidean norm; rescales when squaring would under- or overflow.
pub fn norm<T: Real>(v: &[T]) -> T {
    let plain = dot_raw(v, v);
    if plain.is_normal() && plain.is_finite() {
        return plain.sqrt();
    }
    let m = v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    let s = v.iter().fold(T::zero(), |acc, &x| {
        let y = x / m;
        acc + y * y
    });
    m * s.sqrt()
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

#[inline]
pub(crate) fn scale<T: Real>(a: T, x: &mut [T]) {
    for xi in x.iter_mut() {
        *xi = *xi * a;
    }
}

pub fn sub<T: Real>(u: &[T], v: &[T]) -> Result<Vector<T>> {
    check_dim(u.len(), v.len())?;
    Ok(u.iter().zip(v).map(|(&a, &b)| a - b).collect())
}

pub fn unit<T: Real>(dim: usize, i: usize) -> Vector<T> {
    let mut e = vec![T::zero(); dim];
    e[i] = T::one();
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::rng::SeededRng;

    #[test]
    fn unit_vectors() {
        let e1 = unit::<f64>(3, 0);
        let e2 = unit::<f64>(3, 1);
        assert_eq!(dot(&e1, &e1).unwrap(), 1.0);
        assert_eq!(dot(&e1, &e2).unwrap(), 0.0);
    }

    #[test]
    fn dot_matches_reverse_summation() {
        let mut rng = SeededRng::new(11);
        let u = rng.normal_vec(8);
        let v = rng.normal_vec(8);
        let mut reverse = 0.0;
        for i in (0..8).rev() {
            reverse += u[i] * v[i];
        }
        assert!((dot(&u, &v).unwrap() - reverse).abs() <= 1e-14);
    }

    #[test]
    fn dot_rejects_length_mismatch() {
        let err = dot(&[1.0f64, 2.0], &[1.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::Dimension {
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn norm_zero_only_for_zero() {
        assert_eq!(norm(&[0.0f64; 4]), 0.0);
        assert!(norm(&[0.0f64, 1e-200, 0.0]) > 0.0);
    }
}
