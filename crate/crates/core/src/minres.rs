//! MINRES with built-in nonpositive-curvature (NPC) detection.
//!
//! Each iteration performs one Lanczos step, updates the implicit QR
//! factorization of `T̃_k` with a 2×2 reflection, and tests the NPC
//! condition `c_{k-1} γ⁽¹⁾_k ≥ 0` before touching the iterate. When the
//! condition holds, `r_{k-1}` satisfies `⟨r_{k-1}, A r_{k-1}⟩ ≤ 0` and is
//! returned (or recorded, if the caller asked to continue).
//!
//! Residuals are carried by the recurrence `r_k = s_k² r_{k-1} − φ_k c_k v_{k+1}`,
//! so a plain solve costs exactly one matrix-vector product per iteration.

use crate::error::{check_dim, Error, Result};
use crate::lanczos::{lanczos_init, LanczosConfig, LanczosState, Tridiagonal};
use crate::linalg::{axpy, dot_raw, norm, Vector};
use crate::operator::{apply_operator, SymmetricOperator};
use crate::oracle::jacobi_eigen;
use crate::scalar::Real;
use crate::trace::{IterationRecord, IterationTrace};

/// Absolute tolerance (relative to `‖A‖_est`) under which `γ⁽²⁾_k` counts as zero.
pub const GAMMA_ZERO_RTOL: f64 = 1e-12;

/// One 2×2 reflection `[c s; s −c]` and the resulting diagonal entry of `R_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensPair<T> {
    pub c: T,
    pub s: T,
    pub gamma2: T,
}

/// Reflection annihilating `β` below `γ⁽¹⁾`; `(0, 1, 0)` when both vanish.
pub fn givens<T: Real>(gamma1: T, beta_next: T) -> GivensPair<T> {
    let gamma2 = gamma1.hypot(beta_next);
    if gamma2 > T::zero() {
        GivensPair {
            c: gamma1 / gamma2,
            s: beta_next / gamma2,
            gamma2,
        }
    } else {
        GivensPair {
            c: T::zero(),
            s: T::one(),
            gamma2: T::zero(),
        }
    }
}

/// The NPC test `c_{k-1} γ⁽¹⁾_k ≥ −slack`.
#[inline]
pub fn npc_check<T: Real>(c_prev: T, gamma1: T, slack: T) -> bool {
    c_prev * gamma1 >= -slack
}

/// `⟨r_{k-1}, A r_{k-1}⟩` from scalars alone: `−φ²_{k-1} c_{k-1} γ⁽¹⁾_k`.
#[inline]
pub fn curvature_estimate<T: Real>(phi_prev: T, c_prev: T, gamma1: T) -> T {
    -(phi_prev * phi_prev) * c_prev * gamma1
}

#[derive(Debug, Clone)]
pub struct MinresConfig<T> {
    /// Stop once `φ_k ≤ rtol · β_1`.
    pub rtol: T,
    /// Iteration cap; `None` means the operator dimension.
    pub maxit: Option<usize>,
    /// Return `r_{k-1}` as soon as the NPC condition holds. Otherwise the
    /// event is recorded in the trace and the iteration continues.
    pub stop_on_npc: bool,
    pub reorthogonalize: bool,
    /// Recompute `b − Ax_k` and `λ_min(T_k)` every iteration and keep the
    /// full vector history for the oracle suite.
    pub diagnostics: bool,
    /// Slack in the NPC inequality; zero reproduces the exact condition.
    pub npc_slack: T,
    /// Test hook: flips the sign of `c_k` in every reflection.
    #[doc(hidden)]
    pub givens_fault: bool,
}

impl<T: Real> Default for MinresConfig<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            maxit: None,
            stop_on_npc: true,
            reorthogonalize: false,
            diagnostics: false,
            npc_slack: T::zero(),
            givens_fault: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Solution,
    NpcDirection,
    MaxIterations,
}

impl std::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutcomeKind::Solution => "solution",
            OutcomeKind::NpcDirection => "npc_direction",
            OutcomeKind::MaxIterations => "max_iterations",
        })
    }
}

/// Scalars of one completed iteration `k` (1-based, as in the recurrences).
#[derive(Debug, Clone, Copy)]
pub struct StepScalars<T> {
    pub alpha: T,
    /// `β_k` (`β_1 = ‖b‖` for `k = 1`).
    pub beta: T,
    pub beta_next: T,
    pub delta1: T,
    pub delta2: T,
    pub gamma1: T,
    pub gamma2: T,
    /// `ε_k`
    pub eps: T,
    pub c: T,
    pub s: T,
    pub tau: T,
    pub phi: T,
    pub npc: bool,
}

/// Scalars available at an iteration that stopped on the NPC test, before
/// the reflection was formed.
#[derive(Debug, Clone, Copy)]
pub struct NpcStopScalars<T> {
    pub k: usize,
    pub alpha: T,
    pub beta_next: T,
    pub delta2: T,
    pub gamma1: T,
    pub eps: T,
}

/// Full per-iteration record kept in diagnostics mode. Vectors use the
/// natural 0-based index: `x[k] = x_k`, `r[k] = r_k`, `d[k] = d_k`
/// (`d[0] = 0`), `v[k] = v_k` (`v[0] = 0`).
#[derive(Debug, Clone)]
pub struct History<T> {
    pub rhs: Vector<T>,
    pub beta1: T,
    /// `steps[k-1]` holds iteration `k`.
    pub steps: Vec<StepScalars<T>>,
    pub npc_stop: Option<NpcStopScalars<T>>,
    pub x: Vec<Vector<T>>,
    pub r: Vec<Vector<T>>,
    pub r_explicit: Vec<Vector<T>>,
    pub d: Vec<Vector<T>>,
    pub v: Vec<Vector<T>>,
    pub tridiagonal: Tridiagonal<T>,
}

impl<T: Real> History<T> {
    /// Number of completed iterations.
    pub fn completed(&self) -> usize {
        self.steps.len()
    }

    pub fn step(&self, k: usize) -> &StepScalars<T> {
        &self.steps[k - 1]
    }

    /// `c_i`, with `c_0 = −1`.
    pub fn c(&self, i: usize) -> T {
        if i == 0 {
            -T::one()
        } else {
            self.step(i).c
        }
    }

    /// `s_i`, with `s_0 = 0`.
    pub fn s(&self, i: usize) -> T {
        if i == 0 {
            T::zero()
        } else {
            self.step(i).s
        }
    }

    /// `τ_i`, with `τ_0 = β_1`.
    pub fn tau(&self, i: usize) -> T {
        if i == 0 {
            self.beta1
        } else {
            self.step(i).tau
        }
    }

    /// `φ_i`, with `φ_0 = β_1`.
    pub fn phi(&self, i: usize) -> T {
        if i == 0 {
            self.beta1
        } else {
            self.step(i).phi
        }
    }

    /// First completed iteration at which the NPC test held.
    pub fn first_npc(&self) -> Option<usize> {
        self.steps
            .iter()
            .position(|s| s.npc)
            .map(|i| i + 1)
            .or(self.npc_stop.map(|s| s.k))
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<T> {
    pub kind: OutcomeKind,
    /// `x_k` at termination; `x_{k-1}` when stopped on an NPC direction.
    pub x: Vector<T>,
    /// `r_{k-1}` when `kind` is `NpcDirection`.
    pub npc_direction: Option<Vector<T>>,
    /// Scalar estimate of `⟨r_{k-1}, A r_{k-1}⟩` for the returned direction.
    pub npc_curvature: Option<T>,
    pub iterations: usize,
    /// Matrix-vector products spent by the Lanczos process.
    pub matvecs: usize,
    pub beta1: T,
    /// `φ` at termination.
    pub residual_norm: T,
    pub norm_estimate: T,
    /// First iteration where the NPC condition held, if any.
    pub first_npc: Option<usize>,
    pub trace: IterationTrace<T>,
    pub history: Option<History<T>>,
}

impl<T: Real> SolveOutcome<T> {
    pub fn relative_residual(&self) -> T {
        self.residual_norm / self.beta1
    }
}

/// What a single call to [`Minres::step`] produced.
#[derive(Debug, Clone, PartialEq)]
pub enum StepEvent<T> {
    Continue,
    /// NPC condition held and the solver was configured to stop.
    NpcDetected {
        direction: Vector<T>,
        curvature: T,
    },
    /// `β_{k+1} = 0` or `γ⁽²⁾_k = 0`: `x_k` solves the least-squares problem.
    Solution,
}

/// MINRES iteration state.
pub struct Minres<'a, T: Real, O: SymmetricOperator<T> + ?Sized> {
    op: &'a O,
    config: MinresConfig<T>,
    rhs: Vector<T>,
    lanczos: LanczosState<T>,
    beta1: T,
    k: usize,
    x: Vector<T>,
    r: Vector<T>,
    d_prev: Vector<T>,
    d_prev2: Vector<T>,
    c_prev: T,
    s_prev: T,
    phi: T,
    tau: T,
    /// `β_k`
    beta_k: T,
    /// `δ⁽¹⁾_k`
    delta1: T,
    /// `ε_k`
    eps: T,
    matvecs: usize,
    first_npc: Option<usize>,
    last_npc: Option<(Vector<T>, T)>,
    trace: IterationTrace<T>,
    history: Option<History<T>>,
    finished: bool,
}

impl<'a, T: Real, O: SymmetricOperator<T> + ?Sized> Minres<'a, T, O> {
    pub fn new(op: &'a O, b: &[T], config: MinresConfig<T>) -> Result<Self> {
        check_dim(op.dim(), b.len())?;
        let lanczos_cfg = LanczosConfig {
            reorthogonalize: config.reorthogonalize,
            keep_basis: config.diagnostics,
        };
        let (lanczos, beta1) = lanczos_init(op, b, lanczos_cfg)?;
        let n = b.len();
        let history = config.diagnostics.then(|| History {
            rhs: b.to_vec(),
            beta1,
            steps: Vec::new(),
            npc_stop: None,
            x: vec![vec![T::zero(); n]],
            r: vec![b.to_vec()],
            r_explicit: vec![b.to_vec()],
            d: vec![vec![T::zero(); n]],
            v: vec![vec![T::zero(); n], lanczos.current().to_vec()],
            tridiagonal: Tridiagonal::default(),
        });
        Ok(Self {
            op,
            config,
            rhs: b.to_vec(),
            lanczos,
            beta1,
            k: 1,
            x: vec![T::zero(); n],
            r: b.to_vec(),
            d_prev: vec![T::zero(); n],
            d_prev2: vec![T::zero(); n],
            c_prev: -T::one(),
            s_prev: T::zero(),
            phi: beta1,
            tau: beta1,
            beta_k: beta1,
            delta1: T::zero(),
            eps: T::zero(),
            matvecs: 0,
            first_npc: None,
            last_npc: None,
            trace: IterationTrace::default(),
            history,
            finished: false,
        })
    }

    /// Index of the iteration the next call to [`step`](Self::step) performs.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn residual(&self) -> &[T] {
        &self.r
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn beta1(&self) -> T {
        self.beta1
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Executes one iteration in the order of the reference algorithm.
    pub fn step(&mut self) -> Result<StepEvent<T>> {
        if self.finished {
            return Err(Error::NumericalFailure("MINRES already terminated".into()));
        }
        let k = self.k;
        let ls = self.lanczos.step(self.op)?;
        self.matvecs += 1;
        let alpha = ls.alpha;
        let beta_next = ls.beta_next;
        let v_k = self.lanczos.previous().to_vec();

        let delta2 = self.c_prev * self.delta1 + self.s_prev * alpha;
        let mut gamma1 = self.s_prev * self.delta1 - self.c_prev * alpha;
        let eps_next = self.s_prev * beta_next;
        let delta1_next = -self.c_prev * beta_next;

        // A vanishing γ⁽²⁾ means γ⁽¹⁾ vanishes too; pin it so the NPC test
        // and the degenerate branch see the same exact zero.
        let gamma_tol = T::lit(GAMMA_ZERO_RTOL) * self.lanczos.norm_estimate();
        if gamma1.hypot(beta_next) <= gamma_tol {
            gamma1 = T::zero();
        }

        let curvature = curvature_estimate(self.phi, self.c_prev, gamma1);
        let npc = npc_check(self.c_prev, gamma1, self.config.npc_slack);
        if npc {
            if self.first_npc.is_none() {
                self.first_npc = Some(k);
            }
            self.last_npc = Some((self.r.clone(), curvature));
            if self.config.stop_on_npc {
                self.finished = true;
                let lambda_min = self.lambda_min_tk();
                let rec = self.record(k, Some(curvature), true, lambda_min, None);
                self.trace.records.push(rec);
                if let Some(h) = &mut self.history {
                    h.npc_stop = Some(NpcStopScalars {
                        k,
                        alpha,
                        beta_next,
                        delta2,
                        gamma1,
                        eps: self.eps,
                    });
                    h.tridiagonal = self.lanczos.tridiagonal().clone();
                }
                return Ok(StepEvent::NpcDetected {
                    direction: self.r.clone(),
                    curvature,
                });
            }
        }

        let mut g = givens(gamma1, beta_next);
        if self.config.givens_fault {
            g.c = -g.c;
        }
        let phi_prev = self.phi;
        let (c, s, tau, phi);
        let mut d_k = vec![T::zero(); self.x.len()];
        let event;
        if g.gamma2 != T::zero() {
            c = g.c;
            s = g.s;
            tau = c * phi_prev;
            phi = s * phi_prev;
            let inv = T::one() / g.gamma2;
            for i in 0..d_k.len() {
                d_k[i] = (v_k[i] - delta2 * self.d_prev[i] - self.eps * self.d_prev2[i]) * inv;
            }
            axpy(tau, &d_k, &mut self.x);
            if beta_next != T::zero() {
                let v_next = self.lanczos.current();
                let s2 = s * s;
                let coef = -phi * c;
                for (ri, &vi) in self.r.iter_mut().zip(v_next) {
                    *ri = s2 * *ri + coef * vi;
                }
                event = StepEvent::Continue;
            } else {
                self.r.iter_mut().for_each(|ri| *ri = T::zero());
                event = StepEvent::Solution;
            }
        } else {
            c = T::zero();
            s = T::one();
            tau = T::zero();
            phi = phi_prev;
            event = StepEvent::Solution;
        }
        if phi < T::zero() || !phi.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "residual norm estimate became {phi:e} at iteration {k}"
            )));
        }

        let scalars = StepScalars {
            alpha,
            beta: self.beta_k,
            beta_next,
            delta1: self.delta1,
            delta2,
            gamma1,
            gamma2: g.gamma2,
            eps: self.eps,
            c,
            s,
            tau,
            phi,
            npc,
        };

        self.c_prev = c;
        self.s_prev = s;
        self.tau = tau;
        self.phi = phi;
        self.beta_k = beta_next;
        self.delta1 = delta1_next;
        self.eps = eps_next;
        self.d_prev2 = std::mem::replace(&mut self.d_prev, d_k);
        self.k += 1;
        if event == StepEvent::Solution {
            self.finished = true;
        }

        let lambda_min = self.lambda_min_tk();
        let explicit = if self.config.diagnostics {
            let ax = apply_operator(self.op, &self.x)?;
            Some(
                self.rhs
                    .iter()
                    .zip(&ax)
                    .map(|(&b, &a)| b - a)
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };
        let rec = self.record(
            k,
            Some(curvature),
            npc,
            lambda_min,
            explicit.as_deref().map(norm),
        );
        self.trace.records.push(rec);
        if let Some(h) = &mut self.history {
            h.steps.push(scalars);
            h.x.push(self.x.clone());
            h.r.push(self.r.clone());
            h.r_explicit.push(explicit.unwrap_or_default());
            h.d.push(self.d_prev.clone());
            h.v.push(self.lanczos.current().to_vec());
            h.tridiagonal = self.lanczos.tridiagonal().clone();
        }
        Ok(event)
    }

    fn lambda_min_tk(&self) -> Option<T> {
        if !self.config.diagnostics {
            return None;
        }
        jacobi_eigen(&self.lanczos.tridiagonal().to_dense())
            .ok()
            .and_then(|e| e.values.first().copied())
    }

    fn record(
        &self,
        k: usize,
        curvature: Option<T>,
        npc: bool,
        lambda_min: Option<T>,
        explicit_residual: Option<T>,
    ) -> IterationRecord<T> {
        let x_dot_b = dot_raw(&self.x, &self.rhs);
        let x_dot_r = dot_raw(&self.x, &self.r);
        IterationRecord {
            k,
            phi: self.phi,
            rel_residual: self.phi / self.beta1,
            curvature,
            // Ax = b − r, so ⟨x,Ax⟩/2 − ⟨b,x⟩ = −(⟨x,b⟩ + ⟨x,r⟩)/2.
            m_x: -(x_dot_b + x_dot_r) * T::lit(0.5),
            x_norm: norm(&self.x),
            x_dot_b,
            x_dot_r,
            npc,
            lambda_min,
            explicit_residual,
        }
    }

    fn into_outcome(self, kind: OutcomeKind, npc: Option<(Vector<T>, T)>) -> SolveOutcome<T> {
        let (npc_direction, npc_curvature) = match npc {
            Some((d, c)) => (Some(d), Some(c)),
            None => (None, None),
        };
        SolveOutcome {
            kind,
            x: self.x,
            npc_direction,
            npc_curvature,
            iterations: self.trace.records.len(),
            matvecs: self.matvecs,
            beta1: self.beta1,
            residual_norm: self.phi,
            norm_estimate: self.lanczos.norm_estimate(),
            first_npc: self.first_npc,
            trace: self.trace,
            history: self.history,
        }
    }
}

/// Runs MINRES from `x_0 = 0` until a solution, an NPC direction (when
/// `stop_on_npc`), or the iteration cap.
pub fn minres_solve<T: Real, O: SymmetricOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    config: &MinresConfig<T>,
) -> Result<SolveOutcome<T>> {
    let maxit = config.maxit.unwrap_or(op.dim());
    if maxit == 0 {
        return Err(Error::Validation("maxit must be at least 1".into()));
    }
    if !(config.rtol >= T::zero()) {
        return Err(Error::Validation("rtol must be non-negative".into()));
    }
    let mut solver = Minres::new(op, b, config.clone())?;
    let threshold = config.rtol * solver.beta1();
    loop {
        match solver.step()? {
            StepEvent::NpcDetected {
                direction,
                curvature,
            } => {
                return Ok(
                    solver.into_outcome(OutcomeKind::NpcDirection, Some((direction, curvature)))
                )
            }
            StepEvent::Solution => {
                let npc = solver.last_npc.take();
                return Ok(solver.into_outcome(OutcomeKind::Solution, npc));
            }
            StepEvent::Continue => {
                if solver.phi() <= threshold {
                    let npc = solver.last_npc.take();
                    return Ok(solver.into_outcome(OutcomeKind::Solution, npc));
                }
                if solver.trace.records.len() >= maxit {
                    let npc = solver.last_npc.take();
                    return Ok(solver.into_outcome(OutcomeKind::MaxIterations, npc));
                }
            }
        }
    }
}

/// As [`minres_solve`] but from a nonzero starting point: solves the shifted
/// system with `b − A x0` and adds `x0` back. Trace and history describe the
/// shifted problem.
pub fn minres_solve_from<T: Real, O: SymmetricOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    x0: &[T],
    config: &MinresConfig<T>,
) -> Result<SolveOutcome<T>> {
    check_dim(op.dim(), x0.len())?;
    let ax0 = apply_operator(op, x0)?;
    let shifted: Vector<T> = b.iter().zip(&ax0).map(|(&bi, &ai)| bi - ai).collect();
    let mut out = minres_solve(op, &shifted, config)?;
    for (xi, &x0i) in out.x.iter_mut().zip(x0) {
        *xi = *xi + x0i;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsdCertificate<T> {
    /// No NPC condition fired up to the breakdown at `k = g`.
    CertifiedPsd { iterations: usize },
    /// `direction = r_{k-1}` has nonpositive curvature.
    NpcFound {
        direction: Vector<T>,
        iteration: usize,
        curvature: T,
    },
    /// Iteration cap reached before breakdown.
    Inconclusive { iterations: usize },
}

/// Runs MINRES to breakdown (`rtol = 0`, stopping on NPC) and turns the
/// outcome into a positive-semidefiniteness verdict.
///
/// The verdict on `A` (not just on `T_k`) is valid when `b` has a nonzero
/// component in every eigenspace of `A`, which holds with probability one
/// for `b` drawn from a rotation-invariant distribution such as the uniform
/// distribution on the unit sphere. Choosing `b` is the caller's job.
pub fn certify_psd<T: Real, O: SymmetricOperator<T> + ?Sized>(
    op: &O,
    b: &[T],
    config: &MinresConfig<T>,
) -> Result<PsdCertificate<T>> {
    let cfg = MinresConfig {
        rtol: T::zero(),
        stop_on_npc: true,
        ..config.clone()
    };
    let out = minres_solve(op, b, &cfg)?;
    Ok(match out.kind {
        OutcomeKind::Solution => PsdCertificate::CertifiedPsd {
            iterations: out.iterations,
        },
        OutcomeKind::NpcDirection => PsdCertificate::NpcFound {
            direction: out.npc_direction.expect("NPC outcome carries a direction"),
            iteration: out.iterations,
            curvature: out.npc_curvature.unwrap_or_else(T::zero),
        },
        OutcomeKind::MaxIterations => PsdCertificate::Inconclusive {
            iterations: out.iterations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{indefinite, positive_definite};
    use crate::linalg::unit;
    use crate::operator::{Counted, DenseSymmetric};
    use crate::rng::SeededRng;

    fn diag() -> MinresConfig<f64> {
        MinresConfig {
            reorthogonalize: true,
            diagnostics: true,
            ..MinresConfig::default()
        }
    }

    #[test]
    fn givens_cases() {
        let g = givens(3.0f64, 4.0);
        assert_eq!((g.c, g.s, g.gamma2), (0.6, 0.8, 5.0));
        let g = givens(1.0f64, 0.0);
        assert_eq!((g.c, g.s, g.gamma2), (1.0, 0.0, 1.0));
        let g = givens(0.0f64, 0.0);
        assert_eq!((g.c, g.s, g.gamma2), (0.0, 1.0, 0.0));
        let g = givens(-2.0f64, 7.0);
        assert!((g.c * g.c + g.s * g.s - 1.0).abs() < 1e-15);
        assert!((g.c * -2.0 + g.s * 7.0 - g.gamma2).abs() < 1e-14);
    }

    #[test]
    fn npc_check_and_curvature_on_scalar_cases() {
        // A = −I: c_0 γ⁽¹⁾_1 = (−1)(−1) = 1
        assert!(npc_check(-1.0f64, -1.0, 0.0));
        assert_eq!(curvature_estimate(2.0f64, -1.0, -1.0), -4.0);
        // A = I
        assert!(!npc_check(-1.0f64, 1.0, 0.0));
        assert_eq!(curvature_estimate(2.0f64, -1.0, 1.0), 4.0);
        // zero curvature boundary
        assert!(npc_check(-1.0f64, 0.0, 0.0));
        assert!(!npc_check(-1.0f64, 1e-14, 0.0));
        assert!(npc_check(-1.0f64, 1e-14, 1e-13));
    }

    #[test]
    fn identity_solves_in_one_step() {
        let a = DenseSymmetric::<f64>::identity(3);
        let out = minres_solve(&a, &unit(3, 0), &MinresConfig::default()).unwrap();
        assert_eq!(out.kind, OutcomeKind::Solution);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, unit::<f64>(3, 0));
        assert_eq!(out.residual_norm, 0.0);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn scaled_identity_halves_rhs() {
        let a = DenseSymmetric::diagonal(&[2.0f64; 4]);
        let b = [1.0, -3.0, 0.5, 2.0];
        let out = minres_solve(&a, &b, &MinresConfig::default()).unwrap();
        assert_eq!(out.kind, OutcomeKind::Solution);
        assert_eq!(out.iterations, 1);
        for (x, b) in out.x.iter().zip(&b) {
            assert!((x - b / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_identity_returns_rhs_as_npc_direction() {
        let a = DenseSymmetric::diagonal(&[-1.0f64; 3]);
        let b = vec![1.0, 2.0, -2.0];
        let out = minres_solve(&a, &b, &MinresConfig::default()).unwrap();
        assert_eq!(out.kind, OutcomeKind::NpcDirection);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.npc_direction.as_ref().unwrap(), &b);
        assert_eq!(out.x, vec![0.0; 3]);
        assert!((out.npc_curvature.unwrap() + 9.0).abs() < 1e-13);
        assert!(out.trace.records[0].npc);
        assert_eq!(out.first_npc, Some(1));
    }

    #[test]
    fn zero_curvature_at_first_step() {
        let a = DenseSymmetric::diagonal(&[1.0f64, -1.0]);
        let h = 1.0 / 2f64.sqrt();
        let out = minres_solve(&a, &[h, h], &MinresConfig::default()).unwrap();
        assert_eq!(out.kind, OutcomeKind::NpcDirection);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.npc_curvature.unwrap().abs(), 0.0);
    }

    #[test]
    fn continuing_past_npc_records_it() {
        let a = DenseSymmetric::diagonal(&[1.0f64, -1.0]);
        let cfg = MinresConfig {
            stop_on_npc: false,
            ..MinresConfig::default()
        };
        let out = minres_solve(&a, &[0.6, 0.8], &cfg).unwrap();
        assert_eq!(out.kind, OutcomeKind::Solution);
        assert_eq!(out.iterations, 2);
        assert!(out.trace.records[0].npc);
        assert!((out.x[0] - 0.6).abs() < 1e-14 && (out.x[1] + 0.8).abs() < 1e-14);
        assert_eq!(out.first_npc, Some(1));
        assert!(out.npc_direction.is_some());
    }

    #[test]
    fn random_pd_converges_without_npc() {
        let mut rng = SeededRng::new(21);
        let inst = positive_definite(&mut rng, 10);
        let out = minres_solve(&inst.matrix, &inst.rhs, &MinresConfig::default()).unwrap();
        assert_eq!(out.kind, OutcomeKind::Solution);
        assert!(out.first_npc.is_none());
        let full = inst.matrix.to_matrix();
        let ax = full.mat_vec(&out.x).unwrap();
        let r: f64 = ax
            .iter()
            .zip(&inst.rhs)
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(r <= 1e-10 * out.beta1 * 10.0, "residual {r:e}");
        // dense direct comparison
        let x_direct = crate::oracle::solve_full_pivot(&full, &inst.rhs).unwrap();
        for (x, y) in out.x.iter().zip(&x_direct) {
            assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn one_matvec_per_iteration() {
        let mut rng = SeededRng::new(22);
        let inst = indefinite(&mut rng, 12);
        let counted = Counted::new(inst.matrix.clone());
        let cfg = MinresConfig {
            stop_on_npc: false,
            ..MinresConfig::default()
        };
        let out = minres_solve(&counted, &inst.rhs, &cfg).unwrap();
        assert_eq!(counted.matvecs(), out.iterations);
        assert_eq!(out.matvecs, out.iterations);
    }

    #[test]
    fn maxit_is_reported_not_an_error() {
        let mut rng = SeededRng::new(23);
        let inst = positive_definite(&mut rng, 10);
        let cfg = MinresConfig {
            maxit: Some(3),
            ..MinresConfig::default()
        };
        let out = minres_solve(&inst.matrix, &inst.rhs, &cfg).unwrap();
        assert_eq!(out.kind, OutcomeKind::MaxIterations);
        assert_eq!(out.iterations, 3);
        assert_eq!(out.trace.len(), 3);
    }

    #[test]
    fn bad_inputs() {
        let a = DenseSymmetric::<f64>::identity(3);
        assert!(matches!(
            minres_solve(&a, &[0.0; 3], &MinresConfig::default()),
            Err(Error::ZeroRhs)
        ));
        assert!(matches!(
            minres_solve(&a, &[1.0; 2], &MinresConfig::default()),
            Err(Error::Dimension { .. })
        ));
        let cfg = MinresConfig {
            maxit: Some(0),
            ..MinresConfig::default()
        };
        assert!(matches!(
            minres_solve(&a, &[1.0; 3], &cfg),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn phi_tracks_explicit_residual() {
        let mut rng = SeededRng::new(24);
        for _ in 0..5 {
            let inst = indefinite(&mut rng, 9);
            let cfg = MinresConfig {
                stop_on_npc: false,
                ..diag()
            };
            let out = minres_solve(&inst.matrix, &inst.rhs, &cfg).unwrap();
            let mut prev = out.beta1;
            for rec in &out.trace.records {
                assert!((rec.phi - rec.explicit_residual.unwrap()).abs() <= 1e-9 * out.beta1);
                assert!(rec.phi <= prev);
                prev = rec.phi;
            }
        }
    }

    #[test]
    fn nonzero_start_solves_shifted_system() {
        let mut rng = SeededRng::new(25);
        let inst = positive_definite(&mut rng, 6);
        let x0 = rng.normal_vec(6);
        let out =
            minres_solve_from(&inst.matrix, &inst.rhs, &x0, &MinresConfig::default()).unwrap();
        let plain = minres_solve(&inst.matrix, &inst.rhs, &MinresConfig::default()).unwrap();
        for (x, y) in out.x.iter().zip(&plain.x) {
            assert!((x - y).abs() <= 1e-8);
        }
        // starting at the solution: shifted rhs is (numerically) tiny but nonzero
        let exact = crate::oracle::solve_full_pivot(&inst.matrix.to_matrix(), &inst.rhs).unwrap();
        let ax = apply_operator(&inst.matrix, &exact).unwrap();
        if ax.iter().zip(&inst.rhs).all(|(a, b)| a == b) {
            assert!(matches!(
                minres_solve_from(&inst.matrix, &inst.rhs, &exact, &MinresConfig::default()),
                Err(Error::ZeroRhs)
            ));
        }
    }

    #[test]
    fn psd_certificates_on_small_cases() {
        let a = DenseSymmetric::<f64>::identity(4);
        let cert = certify_psd(&a, &[1.0, 2.0, 3.0, 4.0], &MinresConfig::default()).unwrap();
        assert_eq!(cert, PsdCertificate::CertifiedPsd { iterations: 1 });

        let a = DenseSymmetric::diagonal(&[1.0f64, -1.0]);
        let mut rng = SeededRng::new(26);
        for _ in 0..10 {
            let b = rng.normal_vec(2);
            match certify_psd(&a, &b, &MinresConfig::default()).unwrap() {
                PsdCertificate::NpcFound {
                    iteration,
                    direction,
                    ..
                } => {
                    assert!(iteration <= 2);
                    let curv = direction[0] * direction[0] - direction[1] * direction[1];
                    assert!(curv <= 1e-12);
                }
                other => panic!("expected NPC, got {other:?}"),
            }
        }

        let mut rng = SeededRng::new(27);
        let inst = positive_definite(&mut rng, 5);
        let cfg = MinresConfig {
            maxit: Some(2),
            ..MinresConfig::default()
        };
        assert_eq!(
            certify_psd(&inst.matrix, &inst.rhs, &cfg).unwrap(),
            PsdCertificate::Inconclusive { iterations: 2 }
        );
    }

    #[test]
    fn history_is_complete_in_diagnostics_mode() {
        let mut rng = SeededRng::new(28);
        let inst = positive_definite(&mut rng, 6);
        let out = minres_solve(&inst.matrix, &inst.rhs, &diag()).unwrap();
        let h = out.history.unwrap();
        let k = h.completed();
        assert_eq!(k, out.iterations);
        assert_eq!(h.x.len(), k + 1);
        assert_eq!(h.r.len(), k + 1);
        assert_eq!(h.d.len(), k + 1);
        assert_eq!(h.v.len(), k + 2);
        assert_eq!(h.tridiagonal.order(), k);
        assert!(out
            .trace
            .records
            .iter()
            .all(|r| r.lambda_min.unwrap() > 0.0));
        // d_1 = v_1 / γ⁽²⁾_1
        let g = h.step(1).gamma2;
        for (d, v) in h.d[1].iter().zip(&h.v[1]) {
            assert!((d - v / g).abs() < 1e-15);
        }
    }

    #[test]
    fn f32_instantiation_runs() {
        let a = DenseSymmetric::diagonal(&[1.0f32, 2.0, 4.0]);
        let cfg = MinresConfig {
            rtol: 1e-5f32,
            ..MinresConfig::default()
        };
        let out = minres_solve(&a, &[1.0f32, 1.0, 1.0], &cfg).unwrap();
        assert_eq!(out.kind, OutcomeKind::Solution);
        assert!((out.x[2] - 0.25).abs() < 1e-5);
    }
}
