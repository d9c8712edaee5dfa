//! Trailing principal minors `p_(k,l)` of `T_k` and `q_(k,l)` of `S_k`, the
//! top-right `(k−1)×(k−1)` block of the triangular factor `R_k`.
//!
//! Three evaluations: dense determinants, the three-term recurrence, and the
//! closed form in terms of `p`, `c` and `γ⁽¹⁾`. Tables are indexed by the
//! natural iteration number: `p[k][l]` for `0 ≤ l ≤ k`, `q[k][l]` for
//! `0 ≤ l < k`; `p[0]` and `q[0]` are empty.

use crate::dense::Matrix;
use crate::minres::History;
use crate::oracle::solve_full_pivot;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct MinorTable<T> {
    pub p: Vec<Vec<T>>,
    pub q: Vec<Vec<T>>,
}

impl<T: Real> MinorTable<T> {
    /// `q_(k,l)` with the conventions `q_(k,0) = 1`, `q_(k,−1) = 0`.
    pub fn q(&self, k: usize, l: isize) -> T {
        if l < 0 {
            T::zero()
        } else {
            self.q[k][l as usize]
        }
    }

    pub fn p(&self, k: usize, l: isize) -> T {
        if l < 0 {
            T::zero()
        } else {
            self.p[k][l as usize]
        }
    }

    /// Largest iteration index covered.
    pub fn order(&self) -> usize {
        self.q.len().saturating_sub(1)
    }
}

fn alpha<T: Real>(h: &History<T>, j: usize) -> T {
    h.tridiagonal.alphas[j - 1]
}

/// `β_j` for `j ≥ 2` (off-diagonal of `T`).
fn beta<T: Real>(h: &History<T>, j: usize) -> T {
    h.tridiagonal.betas[j - 2]
}

fn block<T: Real>(n: usize, entry: impl Fn(usize, usize) -> T) -> Matrix<T> {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = entry(i, j);
        }
    }
    m
}

fn det_of<T: Real>(n: usize, entry: impl Fn(usize, usize) -> T) -> T {
    if n == 0 {
        return T::one();
    }
    block(n, entry).determinant().expect("square")
}

/// Relative accuracy attainable for `det B` in floating point: a relative
/// entry perturbation `ε` moves `det B` by up to about `n ε κ_F(B)`
/// relatively. Infinite when `B` is numerically singular.
fn det_accuracy<T: Real>(n: usize, entry: impl Fn(usize, usize) -> T) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let m = block(n, entry);
    let mut inv_sq = T::zero();
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        match solve_full_pivot(&m, &e) {
            Ok(col) => inv_sq = inv_sq + col.iter().fold(T::zero(), |acc, &x| acc + x * x),
            Err(_) => return f64::INFINITY,
        }
    }
    let kappa = (m.frobenius() * inv_sq.sqrt())
        .to_f64()
        .unwrap_or(f64::INFINITY);
    n as f64 * f64::EPSILON * kappa
}

/// Entry `(i, j)` (1-based) of `S_k`: `δ⁽²⁾_{i+1}` on the diagonal,
/// `γ⁽²⁾_{i}` below it (row `i`, column `i−1`) and `ε_{i+2}` above.
fn s_entry<T: Real>(h: &History<T>, i: usize, j: usize) -> T {
    if i == j {
        h.step(i + 1).delta2
    } else if i == j + 1 {
        h.step(i).gamma2
    } else if j == i + 1 {
        h.step(i + 2).eps
    } else {
        T::zero()
    }
}

/// Per-entry relative tolerance for comparing two evaluations of a minor:
/// `max(floor, 64 · n ε κ_F(B))` for the block `B` whose determinant it is.
pub fn minor_tolerances<T: Real>(h: &History<T>, kmax: usize, floor: f64) -> MinorTable<f64> {
    let mut p = vec![Vec::new()];
    let mut q = vec![Vec::new()];
    let widen = |acc: f64| floor.max(64.0 * acc);
    for k in 1..=kmax {
        p.push(
            (0..=k)
                .map(|l| {
                    let first = k - l + 1;
                    widen(det_accuracy(l, |i, j| t_entry(h, first + i, first + j)))
                })
                .collect(),
        );
        q.push(
            (0..k)
                .map(|l| {
                    let first = k - l;
                    widen(det_accuracy(l, |i, j| s_entry(h, first + i, first + j)))
                })
                .collect(),
        );
    }
    MinorTable { p, q }
}

/// Entry `(a, b)` (1-based) of `T`.
fn t_entry<T: Real>(h: &History<T>, a: usize, b: usize) -> T {
    if a == b {
        alpha(h, a)
    } else if a + 1 == b || b + 1 == a {
        beta(h, a.max(b))
    } else {
        T::zero()
    }
}

/// Every minor by LU determinant of the explicit submatrix, for the first
/// `kmax` completed iterations.
pub fn minors_direct<T: Real>(h: &History<T>, kmax: usize) -> MinorTable<T> {
    let mut p = vec![Vec::new()];
    let mut q = vec![Vec::new()];
    for k in 1..=kmax {
        let pk = (0..=k)
            .map(|l| {
                let first = k - l + 1; // 1-based first index of the trailing block
                det_of(l, |i, j| t_entry(h, first + i, first + j))
            })
            .collect();
        let qk = (0..k)
            .map(|l| {
                let first = k - l; // S_k is (k−1)×(k−1); trailing block starts at k−l
                det_of(l, |i, j| s_entry(h, first + i, first + j))
            })
            .collect();
        p.push(pk);
        q.push(qk);
    }
    MinorTable { p, q }
}

fn p_recurrence<T: Real>(h: &History<T>, k: usize) -> Vec<T> {
    let mut pk = vec![T::one()];
    for l in 1..=k {
        let a = alpha(h, k - l + 1);
        let prev2 = if l >= 2 { pk[l - 2] } else { T::zero() };
        let b2 = if l >= 2 {
            let b = beta(h, k - l + 2);
            b * b
        } else {
            T::zero()
        };
        pk.push(a * pk[l - 1] - b2 * prev2);
    }
    pk
}

/// `q_(k,l) = δ⁽²⁾_{k−l+1} q_(k,l−1) − γ⁽²⁾_{k−l+1} ε_{k−l+2} q_(k,l−2)`, and
/// the analogous `p_(k,l) = α_{k−l+1} p_(k,l−1) − β²_{k−l+2} p_(k,l−2)`.
pub fn minors_recurrence<T: Real>(h: &History<T>, kmax: usize) -> MinorTable<T> {
    let mut p = vec![Vec::new()];
    let mut q = vec![Vec::new()];
    for k in 1..=kmax {
        p.push(p_recurrence(h, k));
        let mut qk = vec![T::one()];
        for l in 1..k {
            let j = k - l + 1;
            let prev2 = if l >= 2 { qk[l - 2] } else { T::zero() };
            let coupling = if l >= 2 {
                h.step(j).gamma2 * h.step(j + 1).eps
            } else {
                T::zero()
            };
            qk.push(h.step(j).delta2 * qk[l - 1] - coupling * prev2);
        }
        q.push(qk);
    }
    MinorTable { p, q }
}

/// The closed form
///
/// `q_(k,l) = ( p_(k,l)/Π_{i=1}^{l} γ⁽²⁾_{k−i}
///            + c_{k−l−1} Σ_{i=1}^{l} (−1)^{l−i+1} γ⁽¹⁾_{k−i} p_(k,i−1)/Π_{j=1}^{i} γ⁽²⁾_{k−j} )
///            · Π_{i=1}^{l} β_{k−i+1}`.
///
/// Entries that would divide by a zero `γ⁽²⁾` are left as NaN and listed in
/// the returned notes.
pub fn minors_closed_form<T: Real>(h: &History<T>, kmax: usize) -> (MinorTable<T>, Vec<String>) {
    let mut notes = Vec::new();
    let mut p = vec![Vec::new()];
    let mut q = vec![Vec::new()];
    for k in 1..=kmax {
        let pk = p_recurrence(h, k);
        let mut qk = vec![T::one()];
        for l in 1..k {
            // prefix products Π_{j=1}^{i} γ⁽²⁾_{k−j}
            let mut gam = vec![T::one()];
            for i in 1..=l {
                gam.push(gam[i - 1] * h.step(k - i).gamma2);
            }
            if gam[l] == T::zero() {
                notes.push(format!("closed form q({k},{l}) skipped: zero gamma2"));
                qk.push(T::nan());
                continue;
            }
            let mut sum = T::zero();
            for i in 1..=l {
                let sign = if (l - i + 1) % 2 == 0 {
                    T::one()
                } else {
                    -T::one()
                };
                sum = sum + sign * h.step(k - i).gamma1 * pk[i - 1] / gam[i];
            }
            let betas: T = (1..=l)
                .map(|i| beta(h, k - i + 1))
                .fold(T::one(), |a, b| a * b);
            qk.push((pk[l] / gam[l] + h.c(k - l - 1) * sum) * betas);
        }
        p.push(pk);
        q.push(qk);
    }
    (MinorTable { p, q }, notes)
}
