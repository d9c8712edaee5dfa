//! Symmetric Lanczos process with optional full reorthogonalization.
//!
//! Produces the orthonormal vectors `v_k` and the entries `α_k`, `β_{k+1}`
//! of the tridiagonal projection `T_k = V_kᵀ A V_k`. One step costs exactly
//! one matrix-vector product.

use crate::dense::Matrix;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot_raw, norm, Vector};
use crate::operator::{DenseSymmetric, SymmetricOperator};
use crate::scalar::Real;

/// Relative threshold below which `β_{k+1}` is treated as an exact breakdown.
pub const BREAKDOWN_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
pub struct LanczosConfig {
    pub reorthogonalize: bool,
    /// Keep every `v_i` even without reorthogonalization.
    pub keep_basis: bool,
}

/// Symmetric tridiagonal `T_k` with diagonal `α_1..α_k` and off-diagonal
/// `β_2..β_k`; `betas` additionally stores `β_{k+1}`, the extra row of `T̃_k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tridiagonal<T> {
    pub alphas: Vec<T>,
    /// `betas[j]` is `β_{j+2}`; its length equals `alphas.len()`.
    pub betas: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn new(alphas: Vec<T>, betas: Vec<T>) -> Result<Self> {
        check_dim(alphas.len(), betas.len())?;
        Ok(Self { alphas, betas })
    }

    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    /// `β_{k+1}` for the current order `k`.
    pub fn trailing_beta(&self) -> T {
        self.betas.last().copied().unwrap_or_else(T::zero)
    }

    /// The leading `k×k` block, i.e. `T_k` as seen at iteration `k`.
    pub fn leading(&self, k: usize) -> Self {
        Self {
            alphas: self.alphas[..k].to_vec(),
            betas: self.betas[..k].to_vec(),
        }
    }

    /// `T_k` as a dense symmetric matrix.
    pub fn to_dense(&self) -> DenseSymmetric<T> {
        let k = self.order();
        DenseSymmetric::from_fn(k, |i, j| {
            if i == j {
                self.alphas[i]
            } else if j == i + 1 {
                self.betas[i]
            } else {
                T::zero()
            }
        })
    }

    /// `T̃_k`, the `(k+1)×k` extension of `T_k` by the row `β_{k+1} e_kᵀ`.
    pub fn extended(&self) -> Matrix<T> {
        let k = self.order();
        let mut m = Matrix::zeros(k + 1, k);
        for i in 0..k {
            m[(i, i)] = self.alphas[i];
            m[(i + 1, i)] = self.betas[i];
            if i + 1 < k {
                m[(i, i + 1)] = self.betas[i];
            }
        }
        m
    }
}

/// Outcome of one Lanczos step.
#[derive(Debug, Clone, Copy)]
pub struct LanczosStep<T> {
    pub alpha: T,
    pub beta_next: T,
    pub breakdown: bool,
}

#[derive(Debug, Clone)]
pub struct LanczosState<T> {
    v_prev: Vector<T>,
    v_curr: Vector<T>,
    /// `β_k`, the coefficient of `v_{k-1}` in the three-term recurrence.
    beta_curr: T,
    /// Index of `v_curr`.
    k: usize,
    basis: Option<Vec<Vector<T>>>,
    reorthogonalize: bool,
    rhs_norm: T,
    norm_est: T,
    tridiagonal: Tridiagonal<T>,
    scratch: Vector<T>,
    broken_down: bool,
}

/// Starts the process from `v_1 = b/‖b‖`; returns the state and `β_1 = ‖b‖`.
pub fn lanczos_init<T: Real, O: SymmetricOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    config: LanczosConfig,
) -> Result<(LanczosState<T>, T)> {
    check_dim(op.dim(), b.len())?;
    let beta1 = norm(b);
    if beta1 == T::zero() {
        return Err(Error::ZeroRhs);
    }
    if !beta1.is_finite() {
        return Err(Error::Validation("right-hand side is not finite".into()));
    }
    let v1: Vector<T> = b.iter().map(|&x| x / beta1).collect();
    let keep = config.reorthogonalize || config.keep_basis;
    let state = LanczosState {
        v_prev: vec![T::zero(); b.len()],
        basis: keep.then(|| vec![v1.clone()]),
        v_curr: v1,
        beta_curr: beta1,
        k: 1,
        reorthogonalize: config.reorthogonalize,
        rhs_norm: beta1,
        norm_est: T::zero(),
        tridiagonal: Tridiagonal::default(),
        scratch: vec![T::zero(); b.len()],
        broken_down: false,
    };
    Ok((state, beta1))
}

impl<T: Real> LanczosState<T> {
    /// Index `k` of the vector the next step will multiply.
    pub fn k(&self) -> usize {
        self.k
    }

    /// `v_k` before a step; `v_{k+1}` after it (zero after a breakdown).
    pub fn current(&self) -> &[T] {
        &self.v_curr
    }

    /// The vector multiplied by the most recent step.
    pub fn previous(&self) -> &[T] {
        &self.v_prev
    }

    pub fn basis(&self) -> Option<&[Vector<T>]> {
        self.basis.as_deref()
    }

    pub fn tridiagonal(&self) -> &Tridiagonal<T> {
        &self.tridiagonal
    }

    /// `max_k |α_k| + β_k + β_{k+1}` over the steps taken so far.
    pub fn norm_estimate(&self) -> T {
        self.norm_est
    }

    pub fn broken_down(&self) -> bool {
        self.broken_down
    }

    /// One Lanczos step: `p = Av_k`, `α_k = v_kᵀp`, `p -= β_k v_{k-1}`,
    /// `p -= α_k v_k`, `β_{k+1} = ‖p‖`, in that order.
    pub fn step<O: SymmetricOperator<T> + ?Sized>(&mut self, op: &O) -> Result<LanczosStep<T>> {
        if self.broken_down {
            return Err(Error::NumericalFailure(
                "Lanczos step requested after breakdown".into(),
            ));
        }
        let mut p = std::mem::take(&mut self.scratch);
        op.apply_to(&self.v_curr, &mut p);
        let alpha = dot_raw(&self.v_curr, &p);
        axpy(-self.beta_curr, &self.v_prev, &mut p);
        axpy(-alpha, &self.v_curr, &mut p);
        if self.reorthogonalize {
            if let Some(basis) = &self.basis {
                // two passes of classical Gram-Schmidt
                for _ in 0..2 {
                    for v in basis {
                        let h = dot_raw(v, &p);
                        axpy(-h, v, &mut p);
                    }
                }
            }
        }
        let mut beta_next = norm(&p);
        if !alpha.is_finite() || !beta_next.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite Lanczos coefficients at step {}",
                self.k
            )));
        }
        let beta_k = if self.k == 1 {
            T::zero()
        } else {
            self.beta_curr
        };
        self.norm_est = self.norm_est.max(alpha.abs() + beta_k + beta_next);
        let threshold = T::lit(BREAKDOWN_RTOL) * self.norm_est * self.rhs_norm.max(T::one());
        let breakdown = beta_next <= threshold;
        if breakdown {
            beta_next = T::zero();
            p.iter_mut().for_each(|x| *x = T::zero());
        } else {
            let inv = T::one() / beta_next;
            p.iter_mut().for_each(|x| *x = *x * inv);
        }
        self.tridiagonal.alphas.push(alpha);
        self.tridiagonal.betas.push(beta_next);

        // shift: v_prev <- v_k, v_curr <- v_{k+1}, scratch <- old v_prev
        let old_prev = std::mem::replace(&mut self.v_prev, std::mem::take(&mut self.v_curr));
        self.v_curr = p;
        self.scratch = old_prev;
        self.beta_curr = beta_next;
        self.k += 1;
        self.broken_down = breakdown;
        if !breakdown {
            if let Some(basis) = &mut self.basis {
                basis.push(self.v_curr.clone());
            }
        }
        Ok(LanczosStep {
            alpha,
            beta_next,
            breakdown,
        })
    }
}
