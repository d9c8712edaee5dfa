//! The symmetric-operator abstraction and its concrete realizations.
//!
//! Solvers only ever see `v ↦ Av` through [`SymmetricOperator`]. Oracles that
//! need the entries ask for a dense backing via
//! [`SymmetricOperator::as_dense`].

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::dense::Matrix;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot_raw, norm, Vector};
use crate::scalar::Real;

pub trait SymmetricOperator<T: Real> {
    fn dim(&self) -> usize;

    /// Writes `Av` into `out`. Both slices have length `dim()`.
    fn apply_to(&self, v: &[T], out: &mut [T]);

    /// Dense backing, when the operator has one.
    fn as_dense(&self) -> Option<&DenseSymmetric<T>> {
        None
    }
}

impl<T: Real, O: SymmetricOperator<T> + ?Sized> SymmetricOperator<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply_to(&self, v: &[T], out: &mut [T]) {
        (**self).apply_to(v, out)
    }
    fn as_dense(&self) -> Option<&DenseSymmetric<T>> {
        (**self).as_dense()
    }
}

/// Checked `Av`.
pub fn apply_operator<T: Real, O: SymmetricOperator<T> + ?Sized>(
    op: &O,
    v: &[T],
) -> Result<Vector<T>> {
    check_dim(op.dim(), v.len())?;
    let mut out = vec![T::zero(); v.len()];
    op.apply_to(v, &mut out);
    Ok(out)
}

/// Real symmetric matrix stored as its packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric<T> {
    n: usize,
    upper: Vec<T>,
}

impl<T: Real> DenseSymmetric<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![T::zero(); n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from a full square matrix, which must be exactly symmetric.
    pub fn from_matrix(a: &Matrix<T>) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::Validation(format!(
                "matrix is {}x{}, not square",
                a.rows(),
                a.cols()
            )));
        }
        for i in 0..a.rows() {
            for j in i + 1..a.cols() {
                if a[(i, j)] != a[(j, i)] {
                    return Err(Error::Validation(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self::from_fn(a.rows(), |i, j| a[(i, j)]))
    }

    /// Builds from a full square matrix, averaging it with its transpose.
    pub fn symmetrized(a: &Matrix<T>) -> Result<Self> {
        check_dim(a.rows(), a.cols())?;
        let half = T::lit(0.5);
        Ok(Self::from_fn(a.rows(), |i, j| {
            half * (a[(i, j)] + a[(j, i)])
        }))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.upper[packed_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: T) {
        let k = packed_index(self.n, i, j);
        self.upper[k] = x;
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let x = self.get(i, j);
                s = s + x * x;
            }
        }
        s.sqrt()
    }
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // row r of the upper triangle holds n - r entries
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

impl<T: Real> SymmetricOperator<T> for DenseSymmetric<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_to(&self, v: &[T], out: &mut [T]) {
        debug_assert_eq!(v.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = T::zero();
            for (j, &vj) in v.iter().enumerate() {
                s = s + self.get(i, j) * vj;
            }
            *o = s;
        }
    }

    fn as_dense(&self) -> Option<&DenseSymmetric<T>> {
        Some(self)
    }
}

/// Matrix-free operator backed by a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F: Fn(&[T], &mut [T])> SymmetricOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply_to(&self, v: &[T], out: &mut [T]) {
        (self.f)(v, out)
    }
}

/// Wraps an operator and counts matrix-vector products.
pub struct Counted<O> {
    inner: O,
    count: AtomicUsize,
}

impl<O> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn matvecs(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<T: Real, O: SymmetricOperator<T>> SymmetricOperator<T> for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply_to(&self, v: &[T], out: &mut [T]) {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_to(v, out)
    }
    fn as_dense(&self) -> Option<&DenseSymmetric<T>> {
        self.inner.as_dense()
    }
}

/// `Q diag(λ) Qᵀ`, symmetrized by averaging with its transpose.
///
/// The columns of `basis` must be orthonormal to `1e-10`.
pub fn from_spectrum<T: Real>(eigenvalues: &[T], basis: &Matrix<T>) -> Result<DenseSymmetric<T>> {
    let n = eigenvalues.len();
    check_dim(n, basis.rows())?;
    check_dim(n, basis.cols())?;
    let defect = basis.orthonormality_defect();
    if !(defect <= T::lit(1e-10)) {
        return Err(Error::Validation(format!(
            "basis columns are not orthonormal (max |QᵀQ - I| = {defect:e})"
        )));
    }
    let mut full = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = T::zero();
            for k in 0..n {
                s = s + basis[(i, k)] * eigenvalues[k] * basis[(j, k)];
            }
            full[(i, j)] = s;
        }
    }
    DenseSymmetric::symmetrized(&full)
}

/// Largest observed `|⟨u,Av⟩ − ⟨Au,v⟩| / (‖u‖‖v‖ scale)` over the given pairs.
pub fn symmetry_defect<T: Real, O: SymmetricOperator<T> + ?Sized>(
    op: &O,
    pairs: &[(Vec<T>, Vec<T>)],
    scale: T,
) -> Result<T> {
    let mut worst = T::zero();
    for (u, v) in pairs {
        let av = apply_operator(op, v)?;
        let au = apply_operator(op, u)?;
        let lhs = dot_raw(u, &av);
        let rhs = dot_raw(&au, v);
        let denom = norm(u) * norm(v) * scale;
        let rel = if denom > T::zero() {
            (lhs - rhs).abs() / denom
        } else {
            (lhs - rhs).abs()
        };
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_dense_symmetric, random_orthogonal};
    use crate::oracle::jacobi_eigen;
    use crate::rng::SeededRng;

    #[test]
    fn identity_and_reflection() {
        let v = vec![1.5f64, -2.0, 0.25];
        assert_eq!(apply_operator(&DenseSymmetric::identity(3), &v).unwrap(), v);
        let d = DenseSymmetric::diagonal(&[1.0f64, -1.0]);
        assert_eq!(apply_operator(&d, &[3.0, 4.0]).unwrap(), vec![3.0, -4.0]);
        assert!(apply_operator(&d, &[1.0]).is_err());
    }

    #[test]
    fn packed_matvec_matches_naive() {
        let mut rng = SeededRng::new(3);
        for n in [1, 2, 7, 20] {
            let a: DenseSymmetric<f64> = random_dense_symmetric(&mut rng, n);
            let full = a.to_matrix();
            let v = rng.normal_vec(n);
            let fast = apply_operator(&a, &v).unwrap();
            for i in 0..n {
                let naive: f64 = (0..n).map(|j| full[(i, j)] * v[j]).sum();
                assert!((fast[i] - naive).abs() <= 1e-13 * (1.0 + naive.abs()));
            }
        }
    }

    #[test]
    fn from_spectrum_cases() {
        let e = from_spectrum(&[1.0f64, 1.0, 1.0], &Matrix::identity(3)).unwrap();
        assert_eq!(e, DenseSymmetric::identity(3));
        let e = from_spectrum(&[2.0f64, 3.0], &Matrix::identity(2)).unwrap();
        assert_eq!(e, DenseSymmetric::diagonal(&[2.0, 3.0]));

        let mut rng = SeededRng::new(11);
        let q: Matrix<f64> = random_orthogonal(&mut rng, 8);
        let mut lam: Vec<f64> = (0..8).map(|i| i as f64 - 3.5).collect();
        let a = from_spectrum(&lam, &q).unwrap();
        let got = jacobi_eigen(&a).unwrap().values;
        lam.sort_by(f64::total_cmp);
        for (x, y) in got.iter().zip(&lam) {
            assert!((x - y).abs() <= 1e-8);
        }

        let skew = Matrix::from_rows(&[vec![1.0f64, 0.1], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            from_spectrum(&[1.0, 2.0], &skew),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn operators_are_symmetric() {
        let mut rng = SeededRng::new(5);
        let a: DenseSymmetric<f64> = random_dense_symmetric(&mut rng, 12);
        let pairs: Vec<_> = (0..100)
            .map(|_| (rng.normal_vec(12), rng.normal_vec(12)))
            .collect();
        let defect = symmetry_defect(&a, &pairs, a.frobenius()).unwrap();
        assert!(defect <= 1e-14, "{defect:e}");
        let f = FnOperator::new(12, |v: &[f64], out: &mut [f64]| a.apply_to(v, out));
        assert_eq!(symmetry_defect(&f, &pairs, a.frobenius()).unwrap(), defect);
    }

    #[test]
    fn counted_counts_applications() {
        let c = Counted::new(DenseSymmetric::<f64>::identity(4));
        assert_eq!(c.matvecs(), 0);
        for _ in 0..3 {
            apply_operator(&c, &[1.0; 4]).unwrap();
        }
        assert_eq!(c.matvecs(), 3);
        assert_eq!(c.into_inner(), DenseSymmetric::identity(4));
    }
}
