//! Seeded random test instances: orthogonal frames, prescribed spectra, and
//! the PD / indefinite / PSD-singular families the verification suite sweeps.

use crate::dense::Matrix;
use crate::linalg::{axpy, dot_raw, norm, scale, Vector};
use crate::operator::{from_spectrum, DenseSymmetric};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Orthogonal matrix from Gram–Schmidt (two passes) on a Gaussian matrix.
pub fn random_orthogonal<T: Real>(rng: &mut SeededRng, n: usize) -> Matrix<T> {
    loop {
        let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut ok = true;
        for _ in 0..n {
            let mut v: Vec<T> = rng.normal_vec(n).into_iter().map(T::lit).collect();
            for _ in 0..2 {
                for q in &cols {
                    let h = dot_raw(q, &v);
                    axpy(-h, q, &mut v);
                }
            }
            let nv = norm(&v);
            if nv <= T::lit(1e-8) {
                ok = false;
                break;
            }
            scale(T::one() / nv, &mut v);
            cols.push(v);
        }
        if ok {
            return Matrix::from_columns(&cols).expect("square frame");
        }
    }
}

/// Gaussian orthogonal ensemble draw: off-diagonal `N(0,1)`, diagonal `N(0,2)`.
pub fn random_dense_symmetric<T: Real>(rng: &mut SeededRng, n: usize) -> DenseSymmetric<T> {
    let mut a = DenseSymmetric::zeros(n);
    for i in 0..n {
        for j in i..n {
            let x = if i == j {
                rng.normal() * std::f64::consts::SQRT_2
            } else {
                rng.normal()
            };
            a.set(i, j, T::lit(x));
        }
    }
    a
}

/// `Q diag(spectrum) Qᵀ` for a random orthogonal `Q`.
pub fn random_spectrum_matrix<T: Real>(rng: &mut SeededRng, spectrum: &[T]) -> DenseSymmetric<T> {
    random_spectrum_matrix_with_basis(rng, spectrum).0
}

pub fn random_spectrum_matrix_with_basis<T: Real>(
    rng: &mut SeededRng,
    spectrum: &[T],
) -> (DenseSymmetric<T>, Matrix<T>) {
    let q = random_orthogonal(rng, spectrum.len());
    let a = from_spectrum(spectrum, &q).expect("orthogonal frame");
    (a, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    PositiveDefinite,
    Indefinite,
    /// `A ⪰ 0` singular, `b ∈ range(A)`.
    PsdInRange,
    /// `A ⪰ 0` singular, `b ∉ range(A)`.
    PsdOutOfRange,
}

/// A symmetric system with known spectrum and known grade.
#[derive(Debug, Clone)]
pub struct Instance<T> {
    pub kind: InstanceKind,
    pub matrix: DenseSymmetric<T>,
    pub rhs: Vector<T>,
    /// Eigenvalues in the order of `basis` columns.
    pub spectrum: Vec<T>,
    pub basis: Matrix<T>,
    /// Number of distinct eigenvalues whose eigenspace `rhs` touches.
    pub grade: usize,
}

/// `n` distinct magnitudes in `[0.5, 10]` separated by at least `0.05`.
fn separated_magnitudes(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    'retry: loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.5, 10.0)).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        for w in v.windows(2) {
            if w[1] - w[0] < 0.05 {
                continue 'retry;
            }
        }
        return v;
    }
}

impl Instance<f64> {
    /// `Σ_{λ_j ≠ 0} (q_jᵀb / λ_j) q_j`, the minimum-norm solution of `Ax = b`;
    /// `None` when `b` is not in the range.
    pub fn solution(&self) -> Option<Vector<f64>> {
        if self.kind == InstanceKind::PsdOutOfRange {
            return None;
        }
        let d = self.spectrum.len();
        let mut x = vec![0.0; d];
        for (j, &lambda) in self.spectrum.iter().enumerate() {
            if lambda != 0.0 {
                let q = self.basis.column(j);
                let c = q.iter().zip(&self.rhs).map(|(a, b)| a * b).sum::<f64>() / lambda;
                axpy(c, &q, &mut x);
            }
        }
        Some(x)
    }
}

/// Assembles `Q diag(spectrum) Qᵀ` and a right-hand side with a nonzero
/// component along every basis column selected by `rhs_support`.
fn build(
    rng: &mut SeededRng,
    kind: InstanceKind,
    spectrum: Vec<f64>,
    rhs_support: impl Fn(usize) -> bool,
) -> Instance<f64> {
    let d = spectrum.len();
    let (matrix, basis) = random_spectrum_matrix_with_basis(rng, &spectrum);
    let mut rhs = vec![0.0; d];
    let mut touched: Vec<f64> = Vec::new();
    for j in 0..d {
        if !rhs_support(j) {
            continue;
        }
        // coefficient bounded away from zero so every eigenspace is touched
        let c = rng.uniform_in(0.3, 1.0) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        axpy(c, &basis.column(j), &mut rhs);
        if !touched.contains(&spectrum[j]) {
            touched.push(spectrum[j]);
        }
    }
    Instance {
        kind,
        matrix,
        rhs,
        spectrum,
        basis,
        grade: touched.len(),
    }
}

pub fn positive_definite(rng: &mut SeededRng, d: usize) -> Instance<f64> {
    let spectrum = separated_magnitudes(rng, d);
    build(rng, InstanceKind::PositiveDefinite, spectrum, |_| true)
}

/// At least one eigenvalue of each sign.
pub fn indefinite(rng: &mut SeededRng, d: usize) -> Instance<f64> {
    assert!(d >= 2);
    let mut spectrum = separated_magnitudes(rng, d);
    let neg = rng.int_in(1, d - 1);
    let mut idx: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        idx.swap(i, rng.int_in(0, i));
    }
    for &i in &idx[..neg] {
        spectrum[i] = -spectrum[i];
    }
    build(rng, InstanceKind::Indefinite, spectrum, |_| true)
}

/// `z ≥ 1` zero eigenvalues, the rest distinct, positive and log-uniform in
/// `[1, 10³]` like the spectral experiment. A narrow positive band would
/// leave 0 so isolated that `T_{g−1}` is numerically singular.
fn psd_spectrum(rng: &mut SeededRng, d: usize) -> (Vec<f64>, usize) {
    let zeros = rng.int_in(1, (d / 3).max(1));
    let mut spectrum = vec![0.0; zeros];
    'retry: loop {
        let mut pos: Vec<f64> = (0..d - zeros)
            .map(|_| 10f64.powf(rng.uniform_in(0.0, 3.0)))
            .collect();
        pos.sort_by(|a, b| a.total_cmp(b));
        for w in pos.windows(2) {
            if w[1] / w[0] < 1.05 {
                continue 'retry;
            }
        }
        spectrum.extend(pos);
        return (spectrum, zeros);
    }
}

pub fn psd_in_range(rng: &mut SeededRng, d: usize) -> Instance<f64> {
    let (spectrum, zeros) = psd_spectrum(rng, d);
    build(rng, InstanceKind::PsdInRange, spectrum, move |j| j >= zeros)
}

pub fn psd_out_of_range(rng: &mut SeededRng, d: usize) -> Instance<f64> {
    let (spectrum, _) = psd_spectrum(rng, d);
    build(rng, InstanceKind::PsdOutOfRange, spectrum, |_| true)
}

/// The sweep family: positive definite or indefinite with equal odds.
pub fn random_instance(rng: &mut SeededRng, d: usize) -> Instance<f64> {
    if rng.uniform() < 0.5 {
        positive_definite(rng, d)
    } else {
        indefinite(rng, d)
    }
}
