//! Newton-MR on a regularized nonlinear least-squares classifier.
//!
//! The objective is
//!
//! ```text
//! f(w) = (1/n) Σ_i (σ(⟨a_i, w⟩) − b_i)² + ψ(w)
//! ```
//!
//! with `σ` the logistic function and `ψ` one of [`Regularizer`]. Each outer
//! iteration solves `∇²f(w) p ≈ −∇f(w)` with MINRES and backtracks along `p`.
//! Two variants:
//!
//! * [`Variant::Npc`] stops MINRES as soon as nonpositive curvature is
//!   detected and then steps along the returned residual, with Armijo on `f`;
//! * [`Variant::Grad`] always runs MINRES to the residual tolerance and uses
//!   Armijo on `‖∇f‖²`.
//!
//! Oracle calls are charged as function = 1, gradient = 1, Hessian-vector
//! product = 2.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::Matrix;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot_raw, norm, Vector};
use crate::minres::{minres_solve, MinresConfig, OutcomeKind};
use crate::operator::{Counted, SymmetricOperator};
use crate::rng::SeededRng;
use crate::scalar::Real;

const L2_COEF: f64 = 0.5;
const NONCONVEX_COEF: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    None,
    /// `0.5 ‖w‖²`
    L2,
    /// `0.01 Σ w_i² / (1 + w_i²)`
    Nonconvex,
}

impl Regularizer {
    pub const ALL: [Regularizer; 3] = [Regularizer::L2, Regularizer::None, Regularizer::Nonconvex];

    pub fn name(self) -> &'static str {
        match self {
            Regularizer::None => "none",
            Regularizer::L2 => "l2",
            Regularizer::Nonconvex => "nonconvex",
        }
    }

    pub fn value<T: Real>(self, w: &[T]) -> T {
        match self {
            Regularizer::None => T::zero(),
            Regularizer::L2 => T::lit(L2_COEF) * dot_raw(w, w),
            Regularizer::Nonconvex => {
                let s: T = w.iter().map(|&x| x * x / (T::one() + x * x)).sum();
                T::lit(NONCONVEX_COEF) * s
            }
        }
    }

    /// `ψ(w + ηp) − ψ(w)` without cancellation.
    pub fn difference<T: Real>(self, w: &[T], p: &[T], eta: T) -> T {
        let two = T::lit(2.0);
        match self {
            Regularizer::None => T::zero(),
            Regularizer::L2 => {
                let s: T = w
                    .iter()
                    .zip(p)
                    .map(|(&x, &d)| eta * d * (two * x + eta * d))
                    .sum();
                T::lit(L2_COEF) * s
            }
            Regularizer::Nonconvex => {
                let s: T = w
                    .iter()
                    .zip(p)
                    .map(|(&x, &d)| {
                        let y = x + eta * d;
                        eta * d * (two * x + eta * d) / ((T::one() + x * x) * (T::one() + y * y))
                    })
                    .sum();
                T::lit(NONCONVEX_COEF) * s
            }
        }
    }

    /// `∂ψ/∂w_i`; the regularizers are separable.
    pub fn derivative<T: Real>(self, x: T) -> T {
        match self {
            Regularizer::None => T::zero(),
            Regularizer::L2 => T::lit(2.0 * L2_COEF) * x,
            Regularizer::Nonconvex => {
                let u = T::one() + x * x;
                T::lit(2.0 * NONCONVEX_COEF) * x / (u * u)
            }
        }
    }

    /// `∂²ψ/∂w_i²`; the Hessian of ψ is diagonal.
    pub fn second_derivative<T: Real>(self, x: T) -> T {
        match self {
            Regularizer::None => T::zero(),
            Regularizer::L2 => T::lit(2.0 * L2_COEF),
            Regularizer::Nonconvex => {
                let u = T::one() + x * x;
                T::lit(2.0 * NONCONVEX_COEF) * (T::one() - T::lit(3.0) * x * x) / (u * u * u)
            }
        }
    }
}

impl FromStr for Regularizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Regularizer::None),
            "l2" => Ok(Regularizer::L2),
            "nonconvex" => Ok(Regularizer::Nonconvex),
            other => Err(Error::Validation(format!(
                "unknown regularizer {other:?} (expected none, l2 or nonconvex)"
            ))),
        }
    }
}

impl std::fmt::Display for Regularizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Logistic function, evaluated without overflow for either sign of `z`.
#[inline]
pub fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `σ(z + δ) − σ(z)` without cancellation, for any `z` and `δ`.
#[inline]
pub fn sigmoid_difference<T: Real>(z: T, delta: T) -> T {
    let y = z + delta;
    if delta >= T::zero() {
        -(-delta).exp_m1() * sigmoid(-z) * sigmoid(y)
    } else {
        delta.exp_m1() * sigmoid(-y) * sigmoid(z)
    }
}

/// Feature rows `a_i` with binary labels `b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub features: Matrix<T>,
    pub labels: Vec<T>,
}

impl<T: Real> Dataset<T> {
    pub fn new(features: Matrix<T>, labels: Vec<T>) -> Result<Self> {
        check_dim(features.rows(), labels.len())?;
        if features.rows() == 0 || features.cols() == 0 {
            return Err(Error::Validation(format!(
                "dataset must have at least one sample and one feature, got {}x{}",
                features.rows(),
                features.cols()
            )));
        }
        if let Some(i) = labels.iter().position(|&b| b != T::zero() && b != T::one()) {
            return Err(Error::Validation(format!(
                "label {} of sample {} is not 0 or 1",
                labels[i],
                i + 1
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }
}

/// Two Gaussian blobs in `R^d` with identity covariance and means
/// `±(separation / 2) · 1/√d`; labels are fair coin flips.
pub fn two_blobs(n: usize, d: usize, separation: f64, seed: u64) -> Result<Dataset<f64>> {
    let mut rng = SeededRng::new(seed);
    let shift = 0.5 * separation / (d as f64).sqrt();
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = if rng.uniform() < 0.5 { 0.0 } else { 1.0 };
        let sign = 2.0 * label - 1.0;
        data.extend(rng.normal_vec(d).into_iter().map(|x| x + sign * shift));
        labels.push(label);
    }
    Dataset::new(Matrix::from_row_major(n, d, data)?, labels)
}

/// `−scale · u` with `u` the unit vector from the class-0 mean to the
/// class-1 mean: most samples are confidently misclassified, `f` is close to
/// its supremum, and the Hessian is typically indefinite.
pub fn adversarial_start<T: Real>(data: &Dataset<T>, scale: T) -> Result<Vector<T>> {
    let d = data.dim();
    let mut sums = [vec![T::zero(); d], vec![T::zero(); d]];
    let mut counts = [0usize; 2];
    for (i, &b) in data.labels.iter().enumerate() {
        let c = usize::from(b == T::one());
        counts[c] += 1;
        axpy(T::one(), data.features.row(i), &mut sums[c]);
    }
    if counts.contains(&0) {
        return Err(Error::Validation(
            "adversarial start needs samples of both classes".into(),
        ));
    }
    let (n0, n1) = (T::from_count(counts[0]), T::from_count(counts[1]));
    let u: Vector<T> = sums[1]
        .iter()
        .zip(&sums[0])
        .map(|(&a, &b)| a / n1 - b / n0)
        .collect();
    let nu = norm(&u);
    if !(nu > T::zero()) {
        return Err(Error::Validation("class means coincide".into()));
    }
    Ok(u.into_iter().map(|x| -scale * x / nu).collect())
}

/// Header-free CSV, one sample per row: label first, then the features.
pub fn load_csv_dataset(path: impl AsRef<Path>) -> Result<Dataset<f64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_dataset(file).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_csv_dataset<R: std::io::Read>(reader: R) -> Result<Dataset<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut vals = rec.iter().map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("not a finite number: {t:?}"),
                })
        });
        let label = vals.next().ok_or_else(|| Error::Parse {
            line,
            msg: "empty row".into(),
        })??;
        if label != 0.0 && label != 1.0 {
            return Err(Error::Parse {
                line,
                msg: format!("label must be 0 or 1, got {label}"),
            });
        }
        let feats = vals.collect::<Result<Vec<f64>>>()?;
        if feats.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "row has no features".into(),
            });
        }
        if let Some(first) = rows.first() {
            if feats.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("row has {} features, expected {}", feats.len(), first.len()),
                });
            }
        }
        rows.push(feats);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::Validation("dataset has no rows".into()));
    }
    Dataset::new(Matrix::from_rows(&rows)?, labels)
}

/// The regularized nonlinear least-squares objective over a dataset.
#[derive(Debug, Clone)]
pub struct NlsProblem<T> {
    pub data: Dataset<T>,
    pub regularizer: Regularizer,
}

impl<T: Real> NlsProblem<T> {
    pub fn new(data: Dataset<T>, regularizer: Regularizer) -> Self {
        Self { data, regularizer }
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    fn margins(&self, w: &[T]) -> Vec<T> {
        (0..self.data.len())
            .map(|i| dot_raw(self.data.features.row(i), w))
            .collect()
    }

    fn inv_n(&self) -> T {
        T::one() / T::from_count(self.data.len())
    }

    pub fn value(&self, w: &[T]) -> Result<T> {
        check_dim(self.dim(), w.len())?;
        let loss: T = self
            .margins(w)
            .into_iter()
            .zip(&self.data.labels)
            .map(|(z, &b)| {
                let e = sigmoid(z) - b;
                e * e
            })
            .sum();
        Ok(loss * self.inv_n() + self.regularizer.value(w))
    }

    /// `f(w + ηp) − f(w)`, accurate even when it is far below the rounding
    /// error of `f` itself (as it is near a minimizer).
    pub fn value_difference(&self, w: &[T], p: &[T], eta: T) -> Result<T> {
        check_dim(self.dim(), w.len())?;
        check_dim(self.dim(), p.len())?;
        let two = T::lit(2.0);
        let loss: T = (0..self.data.len())
            .map(|i| {
                let a = self.data.features.row(i);
                let z = dot_raw(a, w);
                let ds = sigmoid_difference(z, eta * dot_raw(a, p));
                let e = sigmoid(z) - self.data.labels[i];
                ds * (two * e + ds)
            })
            .sum();
        Ok(loss * self.inv_n() + self.regularizer.difference(w, p, eta))
    }

    pub fn gradient(&self, w: &[T]) -> Result<Vector<T>> {
        self.value_and_gradient(w).map(|(_, g)| g)
    }

    /// `f(w)` and `∇f(w)` sharing one pass over the data.
    pub fn value_and_gradient(&self, w: &[T]) -> Result<(T, Vector<T>)> {
        check_dim(self.dim(), w.len())?;
        let two_n = T::lit(2.0) * self.inv_n();
        let mut g: Vector<T> = w.iter().map(|&x| self.regularizer.derivative(x)).collect();
        let mut loss = T::zero();
        for (i, z) in self.margins(w).into_iter().enumerate() {
            let s = sigmoid(z);
            let e = s - self.data.labels[i];
            loss = loss + e * e;
            axpy(
                two_n * e * s * sigmoid(-z),
                self.data.features.row(i),
                &mut g,
            );
        }
        Ok((loss * self.inv_n() + self.regularizer.value(w), g))
    }

    /// `∇²f(w)` as a matrix-free operator.
    pub fn hessian(&self, w: &[T]) -> Result<HessianOperator<'_, T>> {
        check_dim(self.dim(), w.len())?;
        let two_n = T::lit(2.0) * self.inv_n();
        let weights = self
            .margins(w)
            .into_iter()
            .zip(&self.data.labels)
            .map(|(z, &b)| {
                let s = sigmoid(z);
                let ds = s * sigmoid(-z);
                let d2s = ds * (T::one() - T::lit(2.0) * s);
                two_n * (ds * ds + (s - b) * d2s)
            })
            .collect();
        let diag = w
            .iter()
            .map(|&x| self.regularizer.second_derivative(x))
            .collect();
        Ok(HessianOperator {
            features: &self.data.features,
            weights,
            diag,
        })
    }

    pub fn hvp(&self, w: &[T], v: &[T]) -> Result<Vector<T>> {
        check_dim(self.dim(), v.len())?;
        let h = self.hessian(w)?;
        let mut out = vec![T::zero(); v.len()];
        h.apply_to(v, &mut out);
        Ok(out)
    }
}

/// `Σ_i h_i a_i a_iᵀ + diag(ψ'')` at a fixed `w`.
pub struct HessianOperator<'a, T> {
    features: &'a Matrix<T>,
    weights: Vec<T>,
    diag: Vec<T>,
}

impl<T: Real> SymmetricOperator<T> for HessianOperator<'_, T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply_to(&self, v: &[T], out: &mut [T]) {
        for ((o, &d), &x) in out.iter_mut().zip(&self.diag).zip(v) {
            *o = d * x;
        }
        for (i, &h) in self.weights.iter().enumerate() {
            let a = self.features.row(i);
            axpy(h * dot_raw(a, v), a, out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineSearchParams {
    /// Sufficient-decrease constant in `(0, 1)`.
    pub rho: f64,
    /// Backtracking factor in `(0, 1)`.
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            rho: 1e-4,
            shrink: 0.5,
            max_backtracks: 50,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Validation(format!(
                "rho = {} not in (0, 1)",
                self.rho
            )));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Validation(format!(
                "shrink = {} not in (0, 1)",
                self.shrink
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoStep<T> {
    pub step: T,
    /// Merit value at the accepted point.
    pub value: T,
    /// Trial points evaluated, including the accepted one.
    pub trials: usize,
}

impl<T> ArmijoStep<T> {
    pub fn backtracks(&self) -> usize {
        self.trials - 1
    }
}

/// Backtracking from `η = 1`: the first `η ∈ {1, shrink, shrink², …}` with
/// `merit(η) ≤ merit0 + ρ η slope`. `merit(η)` evaluates the merit function
/// at `w + η p`; `slope` is its derivative at `η = 0` (or a surrogate) and
/// must be negative.
pub fn armijo<T: Real>(
    mut merit: impl FnMut(T) -> Result<T>,
    merit0: T,
    slope: T,
    params: &LineSearchParams,
) -> Result<ArmijoStep<T>> {
    params.validate()?;
    if !(slope < T::zero()) {
        return Err(Error::NonDescent {
            slope: slope.to_f64_lossy(),
        });
    }
    let rho = T::lit(params.rho);
    let shrink = T::lit(params.shrink);
    let mut step = T::one();
    for trials in 1..=params.max_backtracks + 1 {
        let value = merit(step)?;
        if value <= merit0 + rho * step * slope {
            return Ok(ArmijoStep {
                step,
                value,
                trials,
            });
        }
        step = step * shrink;
    }
    Err(Error::LineSearchExhausted {
        backtracks: params.max_backtracks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Inner MINRES stops on nonpositive curvature; Armijo on `f`.
    Npc,
    /// Inner MINRES runs to tolerance; Armijo on `‖∇f‖²`.
    Grad,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Npc => "newton_mr",
            Variant::Grad => "newton_mr_grad",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub grad_tol: f64,
    pub inner_rtol: f64,
    pub maxouter: usize,
    /// Inner iteration cap; the problem dimension when absent.
    pub inner_maxit: Option<usize>,
    pub line_search: LineSearchParams,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            inner_rtol: 0.01,
            maxouter: 500,
            inner_maxit: None,
            line_search: LineSearchParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxOuter,
    LineSearchFailed,
    NonDescent,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxOuter => "max_outer",
            RunStatus::LineSearchFailed => "line_search_failed",
            RunStatus::NonDescent => "non_descent",
        })
    }
}

/// One outer iteration: the state at `w_t` and the step taken from it.
/// The final row of a run has no step (`inner = line_search = 0`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterRecord {
    pub iter: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub step: f64,
    /// `f(w_{t+1}) − f(w_t)` evaluated without cancellation; `None` on the
    /// final row. Unlike differences of the `f` column, its sign is reliable
    /// even when the change is far below the rounding error of `f`.
    pub f_change: Option<f64>,
    /// Inner MINRES iterations `N_s` (one Hessian-vector product each).
    pub inner: usize,
    /// Line-search trial points `N_l`.
    pub line_search: usize,
    pub npc_used: bool,
    pub oracle_calls: usize,
    pub cumulative_oracle_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerTrace {
    pub variant: Variant,
    pub regularizer: Regularizer,
    pub status: RunStatus,
    pub records: Vec<OuterRecord>,
}

impl OptimizerTrace {
    pub fn final_record(&self) -> &OuterRecord {
        self.records.last().expect("a run records at least one row")
    }

    pub fn npc_steps(&self) -> usize {
        self.records.iter().filter(|r| r.npc_used).count()
    }

    pub fn total_oracle_calls(&self) -> usize {
        self.final_record().cumulative_oracle_calls
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iter",
            "f",
            "grad_norm",
            "step",
            "f_change",
            "inner_iterations",
            "line_search_iterations",
            "npc_used",
            "oracle_calls",
            "cumulative_oracle_calls",
        ])?;
        for r in &self.records {
            w.write_record([
                r.iter.to_string(),
                r.f.to_string(),
                r.grad_norm.to_string(),
                r.step.to_string(),
                r.f_change.map(|x| x.to_string()).unwrap_or_default(),
                r.inner.to_string(),
                r.line_search.to_string(),
                u8::from(r.npc_used).to_string(),
                r.oracle_calls.to_string(),
                r.cumulative_oracle_calls.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))
    }
}

/// Checks that two runs from the same start agree bit for bit up to and
/// including the first row where either used an NPC step or the accepted
/// steps differ. Returns the first discrepancy.
pub fn identical_prefix(
    a: &OptimizerTrace,
    b: &OptimizerTrace,
) -> std::result::Result<usize, String> {
    let mut shared = 0;
    for (ra, rb) in a.records.iter().zip(&b.records) {
        if ra.f.to_bits() != rb.f.to_bits() || ra.grad_norm.to_bits() != rb.grad_norm.to_bits() {
            return Err(format!(
                "iteration {}: f {} vs {}, ‖∇f‖ {} vs {}",
                ra.iter, ra.f, rb.f, ra.grad_norm, rb.grad_norm
            ));
        }
        shared += 1;
        if ra.npc_used || rb.npc_used || ra.step.to_bits() != rb.step.to_bits() {
            break;
        }
        if ra.inner != rb.inner {
            return Err(format!(
                "iteration {}: inner iterations {} vs {} without an NPC step",
                ra.iter, ra.inner, rb.inner
            ));
        }
    }
    Ok(shared)
}

/// Per-iteration oracle calls for the given counts.
pub fn oracle_calls(variant: Variant, inner: usize, line_search: usize) -> usize {
    match variant {
        Variant::Npc => 2 * inner + line_search + 2,
        Variant::Grad => 2 * inner + 2 * line_search + 2,
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult<T> {
    pub w: Vector<T>,
    pub trace: OptimizerTrace,
}

/// Runs Newton-MR from `w0` until `‖∇f‖ ≤ grad_tol`, `maxouter` steps, or a
/// line-search failure (recorded as the run status, not an error).
pub fn newton_mr_run<T: Real>(
    prob: &NlsProblem<T>,
    w0: &[T],
    variant: Variant,
    config: &NewtonConfig,
) -> Result<NewtonResult<T>> {
    check_dim(prob.dim(), w0.len())?;
    config.line_search.validate()?;
    if !(config.grad_tol >= 0.0 && config.inner_rtol >= 0.0) {
        return Err(Error::Validation(
            "grad_tol and inner_rtol must be non-negative".into(),
        ));
    }
    let inner_cfg = MinresConfig {
        rtol: T::lit(config.inner_rtol),
        maxit: Some(config.inner_maxit.unwrap_or(prob.dim()).max(1)),
        stop_on_npc: variant == Variant::Npc,
        ..MinresConfig::default()
    };
    let mut w = w0.to_vec();
    let mut records = Vec::new();
    let mut cumulative = 0;
    let mut record = |records: &mut Vec<OuterRecord>, mut r: OuterRecord| {
        cumulative += r.oracle_calls;
        r.cumulative_oracle_calls = cumulative;
        records.push(r);
    };

    let status = 'outer: loop {
        let iter = records.len();
        let (f, g) = prob.value_and_gradient(&w)?;
        let gnorm = norm(&g);
        let mut row = OuterRecord {
            iter,
            f: f.to_f64_lossy(),
            grad_norm: gnorm.to_f64_lossy(),
            step: 0.0,
            f_change: None,
            inner: 0,
            line_search: 0,
            npc_used: false,
            oracle_calls: oracle_calls(variant, 0, 0),
            cumulative_oracle_calls: 0,
        };
        if gnorm.to_f64_lossy() <= config.grad_tol {
            record(&mut records, row);
            break RunStatus::Converged;
        }
        if iter >= config.maxouter {
            record(&mut records, row);
            break RunStatus::MaxOuter;
        }

        let hess = Counted::new(prob.hessian(&w)?);
        let rhs: Vector<T> = g.iter().map(|&x| -x).collect();
        let inner = minres_solve(&hess, &rhs, &inner_cfg)?;
        row.inner = hess.matvecs();
        let (p, npc_used) = match (variant, inner.kind) {
            (Variant::Npc, OutcomeKind::NpcDirection) => (
                inner
                    .npc_direction
                    .expect("NPC outcome carries a direction"),
                true,
            ),
            _ => (inner.x, false),
        };
        row.npc_used = npc_used;

        let trial = |eta: T| -> Vector<T> {
            let mut x = w.clone();
            axpy(eta, &p, &mut x);
            x
        };
        let search = match variant {
            Variant::Npc => armijo(
                |eta| prob.value_difference(&w, &p, eta),
                T::zero(),
                dot_raw(&g, &p),
                &config.line_search,
            ),
            Variant::Grad => {
                // ⟨g, Hp⟩ = ⟨g, −g − r⟩ = −‖g‖² + ‖r‖², since rᵀ(−g) = ‖r‖².
                let g2 = gnorm * gnorm;
                let slope = T::lit(2.0) * (inner.residual_norm * inner.residual_norm - g2);
                armijo(
                    |eta| {
                        let gt = prob.gradient(&trial(eta))?;
                        Ok(dot_raw(&gt, &gt))
                    },
                    g2,
                    slope,
                    &config.line_search,
                )
            }
        };
        match search {
            Ok(step) => {
                row.step = step.step.to_f64_lossy();
                // For the grad variant this is instrumentation and is not
                // charged as an oracle call.
                let change = match variant {
                    Variant::Npc => step.value,
                    Variant::Grad => prob.value_difference(&w, &p, step.step)?,
                };
                row.f_change = Some(change.to_f64_lossy());
                row.line_search = step.trials;
                row.oracle_calls = oracle_calls(variant, row.inner, row.line_search);
                w = trial(step.step);
                record(&mut records, row);
            }
            Err(e) => {
                let (status, trials) = match e {
                    Error::LineSearchExhausted { backtracks } => {
                        (RunStatus::LineSearchFailed, backtracks + 1)
                    }
                    Error::NonDescent { .. } => (RunStatus::NonDescent, 0),
                    other => return Err(other),
                };
                row.line_search = trials;
                row.oracle_calls = oracle_calls(variant, row.inner, trials);
                record(&mut records, row);
                break 'outer status;
            }
        }
    };

    Ok(NewtonResult {
        w,
        trace: OptimizerTrace {
            variant,
            regularizer: prob.regularizer,
            status,
            records,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_problem(seed: u64, reg: Regularizer) -> NlsProblem<f64> {
        NlsProblem::new(two_blobs(40, 5, 2.0, seed).unwrap(), reg)
    }

    #[test]
    fn sigmoid_is_stable_and_symmetric() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert_eq!(sigmoid(1000.0f64), 1.0);
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        for z in [-30.0, -2.5, 0.1, 7.0] {
            assert!((sigmoid(z) + sigmoid(-z) - 1.0f64).abs() < 1e-15);
        }
    }

    #[test]
    fn value_at_zero_is_a_quarter() {
        for reg in Regularizer::ALL {
            let p = small_problem(1, reg);
            assert_eq!(p.value(&[0.0; 5]).unwrap(), 0.25);
        }
    }

    #[test]
    fn value_matches_naive_formula() {
        let mut rng = SeededRng::new(3);
        for reg in Regularizer::ALL {
            let p = small_problem(2, reg);
            let w = rng.normal_vec(5);
            let mut loss = 0.0;
            for i in 0..p.data.len() {
                let z: f64 = (0..5).map(|j| p.data.features[(i, j)] * w[j]).sum();
                loss += (1.0 / (1.0 + (-z).exp()) - p.data.labels[i]).powi(2);
            }
            let psi = match reg {
                Regularizer::None => 0.0,
                Regularizer::L2 => 0.5 * w.iter().map(|x| x * x).sum::<f64>(),
                Regularizer::Nonconvex => {
                    0.01 * w.iter().map(|x| x * x / (1.0 + x * x)).sum::<f64>()
                }
            };
            let naive = loss / p.data.len() as f64 + psi;
            let got = p.value(&w).unwrap();
            assert!((got - naive).abs() <= 1e-10 * naive.abs());
        }
    }

    #[test]
    fn differences_match_direct_evaluation() {
        let mut rng = SeededRng::new(9);
        for z in [-800.0f64, -30.0, -1.0, 0.0, 0.5, 40.0, 700.0] {
            for d in [-1000.0, -2.0, -1e-9, 0.0, 1e-12, 3.0, 900.0] {
                let direct = sigmoid(z + d) - sigmoid(z);
                let got = sigmoid_difference(z, d);
                assert!((got - direct).abs() <= 1e-15, "{z} {d}: {got} vs {direct}");
            }
        }
        // tiny δ: first-order term σ'(z) δ, where direct subtraction loses everything
        let got = sigmoid_difference(0.3f64, 1e-20);
        let expect = 1e-20 * sigmoid(0.3) * sigmoid(-0.3);
        assert!((got - expect).abs() <= 1e-14 * expect);
        for reg in Regularizer::ALL {
            let prob = small_problem(5, reg);
            let w = rng.normal_vec(5);
            let p = rng.normal_vec(5);
            for eta in [1.0, 0.25, 1e-3] {
                let x: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a + eta * b).collect();
                let direct = prob.value(&x).unwrap() - prob.value(&w).unwrap();
                let got = prob.value_difference(&w, &p, eta).unwrap();
                assert!(
                    (got - direct).abs() <= 1e-14,
                    "{reg} {eta}: {got} vs {direct}"
                );
            }
            let eta = 1e-12;
            let g = prob.gradient(&w).unwrap();
            let lin = eta * dot_raw(&g, &p);
            let got = prob.value_difference(&w, &p, eta).unwrap();
            assert!((got - lin).abs() <= 1e-9 * lin.abs());
        }
    }

    #[test]
    fn l2_terms_are_exact() {
        let feats = Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let data = Dataset::new(feats, vec![1.0, 0.0]).unwrap();
        let p = NlsProblem::new(data.clone(), Regularizer::L2);
        let q = NlsProblem::new(data, Regularizer::None);
        let w = [0.3f64, -0.7];
        let v = [1.5f64, 2.0];
        let gp = p.gradient(&w).unwrap();
        let gq = q.gradient(&w).unwrap();
        let hp = p.hvp(&w, &v).unwrap();
        let hq = q.hvp(&w, &v).unwrap();
        for j in 0..2 {
            assert_eq!(Regularizer::L2.derivative(w[j]), w[j]);
            assert_eq!(Regularizer::L2.second_derivative(w[j]), 1.0);
            assert!((gp[j] - gq[j] - w[j]).abs() <= 1e-15);
            assert!((hp[j] - hq[j] - v[j]).abs() <= 1e-15);
        }
    }

    #[test]
    fn gradient_vanishes_on_symmetric_data_at_zero() {
        // The same a with both labels: residuals ±1/2 cancel at w = 0.
        let feats = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let p = NlsProblem::new(
            Dataset::new(feats, vec![1.0, 0.0]).unwrap(),
            Regularizer::Nonconvex,
        );
        assert_eq!(p.gradient(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn hessian_is_symmetric() {
        let mut rng = SeededRng::new(11);
        for reg in Regularizer::ALL {
            let p = small_problem(4, reg);
            for _ in 0..10 {
                let w = rng.normal_vec(5);
                let u = rng.normal_vec(5);
                let v = rng.normal_vec(5);
                let a = dot_raw(&u, &p.hvp(&w, &v).unwrap());
                let b = dot_raw(&p.hvp(&w, &u).unwrap(), &v);
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn labels_must_be_binary() {
        let feats = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(Dataset::new(feats.clone(), vec![0.5]).is_err());
        assert!(Dataset::new(feats, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn csv_dataset_loader() {
        let d = read_csv_dataset("1, 0.5, 2\n0,-1,3e-1\n".as_bytes()).unwrap();
        assert_eq!(d.labels, vec![1.0, 0.0]);
        assert_eq!(d.features.row(1), &[-1.0, 0.3]);
        match read_csv_dataset("1,2\n2,3\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_csv_dataset("1,2\n0,x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn armijo_accepts_unit_step_on_quadratic() {
        let w = [1.0, -2.0, 0.5];
        let f = |x: &[f64]| 0.5 * dot_raw(x, x);
        let nw2 = dot_raw(&w, &w);
        let params = LineSearchParams {
            rho: 0.25,
            ..Default::default()
        };
        let step = armijo(
            |eta: f64| Ok(f(&w.iter().map(|x| x - eta * x).collect::<Vec<_>>())),
            f(&w),
            -nw2,
            &params,
        )
        .unwrap();
        assert_eq!(step.step, 1.0);
        assert_eq!(step.trials, 1);
        assert_eq!(step.backtracks(), 0);
    }

    #[test]
    fn armijo_rejects_ascent_and_reports_exhaustion() {
        let p = LineSearchParams::default();
        assert!(matches!(
            armijo(|_| Ok(0.0), 0.0, 0.0, &p),
            Err(Error::NonDescent { .. })
        ));
        assert!(matches!(
            armijo(|_| Ok(0.0), 0.0, f64::NAN, &p),
            Err(Error::NonDescent { .. })
        ));
        let small = LineSearchParams {
            max_backtracks: 3,
            ..p
        };
        let mut calls = 0;
        let r = armijo(
            |_| {
                calls += 1;
                Ok(1.0)
            },
            0.0,
            -1.0,
            &small,
        );
        assert!(matches!(
            r,
            Err(Error::LineSearchExhausted { backtracks: 3 })
        ));
        assert_eq!(calls, 4);
    }

    #[test]
    fn armijo_recheck_on_random_convex_quadratics() {
        let mut rng = SeededRng::new(5);
        for _ in 0..50 {
            let diag: Vec<f64> = (0..4).map(|_| rng.uniform_in(0.1, 50.0)).collect();
            let f = |x: &[f64]| 0.5 * x.iter().zip(&diag).map(|(a, d)| d * a * a).sum::<f64>();
            let w = rng.normal_vec(4);
            let g: Vec<f64> = w.iter().zip(&diag).map(|(a, d)| d * a).collect();
            let p: Vec<f64> = g.iter().map(|x| -x).collect();
            let slope = dot_raw(&g, &p);
            let at =
                |eta: f64| -> Vec<f64> { w.iter().zip(&p).map(|(a, b)| a + eta * b).collect() };
            let params = LineSearchParams::default();
            let s = armijo(|eta| Ok(f(&at(eta))), f(&w), slope, &params).unwrap();
            assert!(f(&at(s.step)) <= f(&w) + params.rho * s.step * slope);
            if s.trials > 1 {
                let prev = s.step / params.shrink;
                assert!(f(&at(prev)) > f(&w) + params.rho * prev * slope);
            }
        }
    }

    #[test]
    fn both_variants_converge_identically_on_convex_problem() {
        let p = small_problem(6, Regularizer::L2);
        let cfg = NewtonConfig::default();
        let a = newton_mr_run(&p, &[0.0; 5], Variant::Npc, &cfg).unwrap();
        let b = newton_mr_run(&p, &[0.0; 5], Variant::Grad, &cfg).unwrap();
        assert_eq!(a.trace.status, RunStatus::Converged);
        assert_eq!(b.trace.status, RunStatus::Converged);
        assert_eq!(a.trace.npc_steps(), 0);
        let shared = identical_prefix(&a.trace, &b.trace).unwrap();
        assert!(shared >= 2);
    }

    #[test]
    fn nonconvex_run_from_adversarial_start_uses_npc_steps() {
        let data = two_blobs(100, 5, 2.0, 12).unwrap();
        let w0 = adversarial_start(&data, 3.0).unwrap();
        let p = NlsProblem::new(data, Regularizer::Nonconvex);
        let h = p.hessian(&w0).unwrap();
        let ev =
            crate::oracle::jacobi_eigen(&crate::operator::DenseSymmetric::from_fn(5, |i, j| {
                let mut e = vec![0.0; 5];
                e[j] = 1.0;
                crate::operator::apply_operator(&h, &e).unwrap()[i]
            }))
            .unwrap();
        assert!(ev.values[0] < 0.0, "start should have negative curvature");
        let r = newton_mr_run(&p, &w0, Variant::Npc, &NewtonConfig::default()).unwrap();
        assert_eq!(r.trace.status, RunStatus::Converged);
        assert!(r.trace.npc_steps() >= 1);
        assert!(r.trace.final_record().grad_norm <= 1e-10);
        for row in &r.trace.records[..r.trace.records.len() - 1] {
            assert!(row.f_change.unwrap() < 0.0);
        }
        let g = newton_mr_run(&p, &w0, Variant::Grad, &NewtonConfig::default()).unwrap();
        identical_prefix(&r.trace, &g.trace).unwrap();
    }

    #[test]
    fn oracle_counts_follow_the_formulas() {
        for reg in Regularizer::ALL {
            let p = small_problem(7, reg);
            for variant in [Variant::Npc, Variant::Grad] {
                let r = newton_mr_run(&p, &[0.5; 5], variant, &NewtonConfig::default()).unwrap();
                let mut total = 0;
                for row in &r.trace.records {
                    assert_eq!(
                        row.oracle_calls,
                        oracle_calls(variant, row.inner, row.line_search)
                    );
                    total += row.oracle_calls;
                    assert_eq!(row.cumulative_oracle_calls, total);
                }
            }
        }
    }

    #[test]
    fn npc_direction_is_descent() {
        // Concave start: w far on the wrong side, nonconvex regularizer only.
        let p = NlsProblem::new(two_blobs(60, 4, 3.0, 8).unwrap(), Regularizer::Nonconvex);
        let w = vec![0.0; 4];
        let (_, g) = p.value_and_gradient(&w).unwrap();
        let h = p.hessian(&w).unwrap();
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let out = minres_solve(&h, &rhs, &MinresConfig::default()).unwrap();
        if let Some(d) = out.npc_direction {
            let gd = dot_raw(&g, &d);
            assert!(gd < 0.0);
            assert!((gd + dot_raw(&d, &d)).abs() <= 1e-10 * dot_raw(&d, &d));
        }
    }
}
