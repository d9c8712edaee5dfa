//! MINRES with built-in nonpositive-curvature detection.
//!
//! The solver ([`minres_solve`]) runs the Lanczos-based MINRES recurrences
//! and tests `c_{k-1} γ⁽¹⁾_k ≥ 0` every iteration; when it holds, the
//! previous residual is a direction of nonpositive curvature and is
//! returned instead of (or alongside) a least-squares solution. Around it:
//!
//! * [`certify_psd`] — positive-semidefiniteness verdicts from a single run,
//! * [`oracle`] — independent brute-force checks of every identity and sign
//!   property the solver is supposed to satisfy,
//! * [`newton`] — a Newton-MR prototype that consumes NPC directions,
//! * [`experiments`] — the spectral trace experiment and the optimizer runs.
//!
//! Everything numerical is generic over [`Real`] (`f32`/`f64`); the `*64`
//! aliases below fix the usual `f64` instantiation.

// `!(x <= tol)` is used on purpose so that NaN fails validation, and index
// loops mirror the subscripted recurrences they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dense;
pub mod error;
pub mod experiments;
pub mod instances;
pub mod io;
pub mod lanczos;
pub mod linalg;
pub mod minres;
pub mod newton;
pub mod operator;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod trace;

pub use dense::Matrix;
pub use error::{Error, Result};
pub use lanczos::{lanczos_init, LanczosConfig, LanczosState, Tridiagonal};
pub use linalg::{dot, norm, Vector};
pub use minres::{
    certify_psd, curvature_estimate, givens, minres_solve, minres_solve_from, npc_check,
    GivensPair, History, Minres, MinresConfig, OutcomeKind, PsdCertificate, SolveOutcome,
    StepEvent,
};
pub use operator::{
    apply_operator, from_spectrum, Counted, DenseSymmetric, FnOperator, SymmetricOperator,
};
pub use rng::SeededRng;
pub use scalar::Real;
pub use trace::{IterationRecord, IterationTrace};

pub type DenseSymmetric64 = DenseSymmetric<f64>;
pub type Matrix64 = Matrix<f64>;
pub type MinresConfig64 = MinresConfig<f64>;
pub type SolveOutcome64 = SolveOutcome<f64>;
pub type PsdCertificate64 = PsdCertificate<f64>;
