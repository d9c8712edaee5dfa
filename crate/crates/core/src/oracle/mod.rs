//! Brute-force oracles: a dense Jacobi eigensolver, an explicit-Krylov
//! least-squares reference, determinant tables, and the checkers that hold
//! a diagnostic MINRES run against every identity, certificate,
//! monotonicity property and sign lemma.
//!
//! Nothing in here reuses the solver's reflections or recurrences; that
//! independence is what makes these oracles.

mod checks;
mod minors;
mod report;

pub use checks::{
    check_identities, check_minors, check_monotonicity, check_reference, check_signs,
    check_tk_certificate, dk_expansion, verify_run, VerifyOptions,
};
pub use minors::{minors_closed_form, minors_direct, minors_recurrence, MinorTable};
pub use report::{CheckReport, Violation};

use crate::dense::Matrix;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot_raw, norm, scale, Vector};
use crate::operator::{DenseSymmetric, SymmetricOperator};
use crate::scalar::Real;

pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: Matrix<T>,
}

fn off_diagonal<T: Real>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver.
pub fn jacobi_eigen<T: Real>(m: &DenseSymmetric<T>) -> Result<EigenDecomposition<T>> {
    let n = m.dim();
    let mut a = m.to_matrix();
    let mut v = Matrix::identity(n);
    let target = T::lit(1e-12) * m.frobenius();
    let mut sweeps = 0;
    while off_diagonal(&a) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NumericalFailure(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .partial_cmp(&a[(j, j)])
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Smallest eigenvalue, or `None` for an empty matrix.
pub fn lambda_min<T: Real>(m: &DenseSymmetric<T>) -> Result<Option<T>> {
    Ok(jacobi_eigen(m)?.values.first().copied())
}

/// Gaussian elimination with full pivoting. Pivots below `1e-14` of the
/// largest initial entry are treated as zero and their unknowns set to 0.
pub fn solve_full_pivot<T: Real>(m: &Matrix<T>, rhs: &[T]) -> Result<Vector<T>> {
    let n = m.rows();
    check_dim(n, m.cols())?;
    check_dim(n, rhs.len())?;
    let mut a = m.clone();
    let mut b = rhs.to_vec();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let tiny = T::lit(1e-14) * a.max_abs();
    let mut rank = n;
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, T::zero());
        for i in k..n {
            for j in k..n {
                if a[(i, j)].abs() > best {
                    best = a[(i, j)].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= tiny {
            rank = k;
            break;
        }
        if pi != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(pi, j)];
                a[(pi, j)] = t;
            }
            b.swap(k, pi);
        }
        if pj != k {
            for i in 0..n {
                let t = a[(i, k)];
                a[(i, k)] = a[(i, pj)];
                a[(i, pj)] = t;
            }
            col_perm.swap(k, pj);
        }
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                a[(i, j)] = a[(i, j)] - f * a[(k, j)];
            }
            b[i] = b[i] - f * b[k];
        }
    }
    let mut y = vec![T::zero(); n];
    for k in (0..rank).rev() {
        let mut s = b[k];
        for j in k + 1..rank {
            s = s - a[(k, j)] * y[j];
        }
        y[k] = s / a[(k, k)];
    }
    let mut x = vec![T::zero(); n];
    for (k, &c) in col_perm.iter().enumerate() {
        x[c] = y[k];
    }
    Ok(x)
}

/// Orthonormal basis of `K_k(A, b)` built by Gram–Schmidt (two passes) on
/// `b, Aq_1, Aq_2, …`; stops early once the subspace stops growing.
pub fn krylov_basis<T: Real>(a: &DenseSymmetric<T>, b: &[T], k: usize) -> Result<Vec<Vector<T>>> {
    check_dim(a.dim(), b.len())?;
    let nb = norm(b);
    if nb == T::zero() {
        return Err(Error::ZeroRhs);
    }
    let scale_a = a.frobenius();
    let mut q1 = b.to_vec();
    scale(T::one() / nb, &mut q1);
    let mut basis = vec![q1];
    let mut aq = vec![T::zero(); b.len()];
    while basis.len() < k {
        a.apply_to(basis.last().expect("nonempty"), &mut aq);
        let mut w = aq.clone();
        for _ in 0..2 {
            for q in &basis {
                let h = dot_raw(q, &w);
                axpy(-h, q, &mut w);
            }
        }
        let nw = norm(&w);
        if nw <= T::lit(1e-10) * scale_a.max(T::one()) {
            break;
        }
        scale(T::one() / nw, &mut w);
        basis.push(w);
    }
    Ok(basis)
}

/// Least-squares solution of `min ‖b − Σ y_j cols_j‖` by Householder QR
/// with column pivoting. Columns whose pivot falls below `1e-12` times the
/// largest are dropped (their coefficients are zero), so rank-deficient
/// problems return a basic minimizer.
pub fn lstsq_qr<T: Real>(cols: &[Vector<T>], b: &[T]) -> Result<Vector<T>> {
    let n = cols.len();
    let m = b.len();
    for c in cols {
        check_dim(m, c.len())?;
    }
    let mut r: Vec<Vector<T>> = cols.to_vec();
    let mut qtb = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = n.min(m);
    let mut rank = 0;
    let mut r00 = T::zero();
    for k in 0..steps {
        // pivot: largest remaining column norm below row k
        let tail_norm = |c: &Vector<T>| norm(&c[k..]);
        let (pj, pn) = (k..n)
            .map(|j| (j, tail_norm(&r[j])))
            .fold(
                (k, T::lit(-1.0)),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        if k == 0 {
            r00 = pn;
        }
        if !(pn > T::lit(1e-12) * r00) {
            break;
        }
        r.swap(k, pj);
        perm.swap(k, pj);
        // reflector H = I − 2uuᵀ/uᵀu mapping r[k][k..] to −sign·‖·‖ e_1
        let alpha = if r[k][k] >= T::zero() { -pn } else { pn };
        let mut u: Vector<T> = r[k][k..].to_vec();
        u[0] = u[0] - alpha;
        let uu = dot_raw(&u, &u);
        if uu > T::zero() {
            let two = T::lit(2.0);
            for col in r.iter_mut().skip(k) {
                let f = two * dot_raw(&u, &col[k..]) / uu;
                axpy(-f, &u, &mut col[k..]);
            }
            let f = two * dot_raw(&u, &qtb[k..]) / uu;
            axpy(-f, &u, &mut qtb[k..]);
        }
        rank = k + 1;
    }
    let mut y = vec![T::zero(); n];
    for i in (0..rank).rev() {
        let mut s = qtb[i];
        for j in i + 1..rank {
            s = s - r[j][i] * y[j];
        }
        y[i] = s / r[i][i];
    }
    let mut out = vec![T::zero(); n];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = y[i];
    }
    Ok(out)
}

/// `x_k = argmin_{x ∈ K_k(A,b)} ‖b − Ax‖` from an explicit orthonormal
/// Krylov basis and a dense QR least-squares solve. Truncates at the grade
/// when `k` exceeds it.
pub fn krylov_lsq_reference<T: Real>(
    a: &DenseSymmetric<T>,
    b: &[T],
    k: usize,
) -> Result<Vector<T>> {
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    let basis = krylov_basis(a, b, k)?;
    let d = b.len();
    let aq: Vec<Vector<T>> = basis
        .iter()
        .map(|q| {
            let mut out = vec![T::zero(); d];
            a.apply_to(q, &mut out);
            out
        })
        .collect();
    let y = lstsq_qr(&aq, b)?;
    let mut x = vec![T::zero(); d];
    for (q, &yi) in basis.iter().zip(&y) {
        axpy(yi, q, &mut x);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::random_dense_symmetric;
    use crate::rng::SeededRng;

    #[test]
    fn qr_least_squares() {
        // overdetermined: fit y = 1 + 2t through exact points
        let ones = vec![1.0f64; 4];
        let t = vec![0.0, 1.0, 2.0, 3.0];
        let b: Vec<f64> = t.iter().map(|x| 1.0 + 2.0 * x).collect();
        let y = lstsq_qr(&[ones.clone(), t.clone()], &b).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] - 2.0).abs() < 1e-14);
        // inconsistent: the residual is orthogonal to the columns
        let b = vec![1.0, 0.0, 0.0, 1.0];
        let y = lstsq_qr(&[ones.clone(), t.clone()], &b).unwrap();
        let r: Vec<f64> = (0..4).map(|i| b[i] - y[0] - y[1] * t[i]).collect();
        assert!(dot_raw(&r, &ones).abs() < 1e-14 && dot_raw(&r, &t).abs() < 1e-14);
        // rank-deficient: duplicate column gets a zero coefficient
        let y = lstsq_qr(&[t.clone(), t.clone()], &b).unwrap();
        assert!(y.contains(&0.0));
        let fit: f64 = 14.0_f64.recip() * dot_raw(&t, &b);
        assert!((y[0] + y[1] - fit).abs() < 1e-14);
    }

    #[test]
    fn jacobi_small_cases() {
        let e = jacobi_eigen(&DenseSymmetric::diagonal(&[3.0f64, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let m = DenseSymmetric::from_fn(2, |i, j| if i == j { 2.0f64 } else { 1.0 });
        let e = jacobi_eigen(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_trace_determinant_and_residuals() {
        let mut rng = SeededRng::new(11);
        for _ in 0..5 {
            let m: DenseSymmetric<f64> = random_dense_symmetric(&mut rng, 10);
            let e = jacobi_eigen(&m).unwrap();
            let sum: f64 = e.values.iter().sum();
            assert!((sum - m.trace()).abs() <= 1e-10);
            let prod: f64 = e.values.iter().product();
            let det = m.to_matrix().determinant().unwrap();
            assert!((prod - det).abs() <= 1e-8 * det.abs());
            assert!(e.vectors.orthonormality_defect() <= 1e-9);
            let full = m.to_matrix();
            for i in 0..10 {
                let q = e.vectors.column(i);
                let aq = full.mat_vec(&q).unwrap();
                let res: f64 = aq
                    .iter()
                    .zip(&q)
                    .map(|(x, y)| (x - e.values[i] * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-8 * m.frobenius());
            }
        }
    }

    #[test]
    fn full_pivot_solves_and_handles_rank_deficiency() {
        let m = Matrix::from_rows(&[vec![0.0f64, 2.0], vec![1.0, 1.0]]).unwrap();
        let x = solve_full_pivot(&m, &[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let s = Matrix::from_rows(&[vec![1.0f64, 1.0], vec![1.0, 1.0]]).unwrap();
        let x = solve_full_pivot(&s, &[2.0, 2.0]).unwrap();
        assert!((x[0] + x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reference_on_identity_is_rhs() {
        let a = DenseSymmetric::<f64>::identity(4);
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = krylov_lsq_reference(&a, &b, 1).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-15);
        }
        // beyond the grade it truncates
        let x3 = krylov_lsq_reference(&a, &b, 3).unwrap();
        assert_eq!(x3, x);
    }

    #[test]
    fn reference_residuals_do_not_increase() {
        let mut rng = SeededRng::new(12);
        let inst = crate::instances::positive_definite(&mut rng, 8);
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let x = krylov_lsq_reference(&inst.matrix, &inst.rhs, k).unwrap();
            let ax = inst.matrix.to_matrix().mat_vec(&x).unwrap();
            let r: f64 = ax
                .iter()
                .zip(&inst.rhs)
                .map(|(a, b)| (b - a).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= prev * (1.0 + 1e-12));
            prev = r;
        }
    }
}
