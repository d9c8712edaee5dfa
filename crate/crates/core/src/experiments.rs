//! Reproducible experiment drivers behind the command-line tool: the
//! spectral trace experiment, the verification sweep, and the Newton-MR
//! comparison.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{
    indefinite, positive_definite, psd_in_range, psd_out_of_range, random_dense_symmetric,
    Instance, InstanceKind,
};
use crate::io::{save_matrix_market, save_vector};
use crate::linalg::{dot_raw, Vector};
use crate::minres::{
    certify_psd, minres_solve, MinresConfig, OutcomeKind, PsdCertificate, SolveOutcome,
};
use crate::newton::{
    adversarial_start, identical_prefix, load_csv_dataset, newton_mr_run, two_blobs, Dataset,
    NewtonConfig, NlsProblem, OptimizerTrace, Regularizer, RunStatus, Variant,
};
use crate::operator::{apply_operator, from_spectrum, DenseSymmetric};
use crate::oracle::{jacobi_eigen, solve_full_pivot, verify_run, CheckReport, VerifyOptions};
use crate::rng::SeededRng;

/// Provenance wrapper: what ran, with which settings, and what came out.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord<C, S> {
    pub experiment: String,
    pub config: C,
    pub outputs: Vec<PathBuf>,
    pub summary: S,
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Attaches `path` to I/O errors from a writer that only knows its role.
fn at_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        Error::Csv(c) if c.is_io_error() => match c.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            _ => unreachable!("checked is_io_error"),
        },
        other => other,
    })
}

// ---------------------------------------------------------------------------
// Spectral trace experiment

pub const FIG1_DIM: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Config {
    pub seed: u64,
    /// `0` runs every system to breakdown or `d` iterations.
    pub rtol: f64,
    pub maxit: Option<usize>,
    pub reorthogonalize: bool,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            seed: 0,
            rtol: 0.0,
            maxit: None,
            reorthogonalize: true,
        }
    }
}

/// `10^{3i/18}`, `i = 0..18`: 19 points log-spaced in `[1, 10³]`.
pub fn fig1_top_spectrum() -> Vec<f64> {
    (0..19).map(|i| 10f64.powf(3.0 * i as f64 / 18.0)).collect()
}

/// Ascending spectra of the three systems: `{0}` or `{−1}` below the 19 top
/// values, and `{−10, −1}` below the largest 18.
pub fn fig1_spectra() -> [(&'static str, Vec<f64>); 3] {
    let top = fig1_top_spectrum();
    let with = |tail: &[f64], from: usize| -> Vec<f64> {
        tail.iter().chain(&top[from..]).copied().collect()
    };
    [
        ("A", with(&[0.0], 0)),
        ("B", with(&[-1.0], 0)),
        ("C", with(&[-10.0, -1.0], 1)),
    ]
}

#[derive(Debug, Clone)]
pub struct Fig1System {
    pub name: &'static str,
    pub spectrum: Vec<f64>,
    pub matrix: DenseSymmetric<f64>,
}

/// Three independent symmetric Gaussian draws (off-diagonal `N(0,1)`,
/// diagonal `N(0,2)`) from one seeded stream; each keeps its eigenvector
/// frame and receives one of [`fig1_spectra`].
pub fn build_fig1_matrices(seed: u64) -> Result<[Fig1System; 3]> {
    let mut rng = SeededRng::new(seed);
    let mut build = |(name, spectrum): (&'static str, Vec<f64>)| -> Result<Fig1System> {
        let goe = random_dense_symmetric::<f64>(&mut rng, FIG1_DIM);
        let frame = jacobi_eigen(&goe)?.vectors;
        let matrix = from_spectrum(&spectrum, &frame)?;
        Ok(Fig1System {
            name,
            spectrum,
            matrix,
        })
    };
    let [a, b, c] = fig1_spectra();
    Ok([build(a)?, build(b)?, build(c)?])
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig1Summary {
    pub system: String,
    pub spectrum: Vec<f64>,
    pub outcome: OutcomeKind,
    pub iterations: usize,
    pub first_npc: Option<usize>,
    pub npc_iterations: Vec<usize>,
    pub curvature_at_first_npc: Option<f64>,
    pub beta1: f64,
    pub final_rel_residual: f64,
    pub checks_run: usize,
    pub violations: usize,
}

#[derive(Debug, Clone)]
pub struct Fig1Run {
    pub system: Fig1System,
    pub outcome: SolveOutcome<f64>,
    pub report: CheckReport,
}

impl Fig1Run {
    pub fn summary(&self) -> Fig1Summary {
        let o = &self.outcome;
        let npc: Vec<usize> = o
            .trace
            .records
            .iter()
            .filter(|r| r.npc)
            .map(|r| r.k)
            .collect();
        Fig1Summary {
            system: self.system.name.to_string(),
            spectrum: self.system.spectrum.clone(),
            outcome: o.kind,
            iterations: o.iterations,
            first_npc: o.first_npc,
            curvature_at_first_npc: o.first_npc.and_then(|k| o.trace.records[k - 1].curvature),
            npc_iterations: npc,
            beta1: o.beta1,
            final_rel_residual: o.relative_residual(),
            checks_run: self.report.checks_run,
            violations: self.report.violations.len(),
        }
    }
}

fn fig1_minres_config(cfg: &Fig1Config, stop_on_npc: bool) -> MinresConfig<f64> {
    MinresConfig {
        rtol: cfg.rtol,
        maxit: cfg.maxit,
        stop_on_npc,
        reorthogonalize: cfg.reorthogonalize,
        diagnostics: true,
        ..MinresConfig::default()
    }
}

/// Solves each system with `b = 1` without stopping at NPC, recording every
/// diagnostic, and runs the oracle suite on each history.
pub fn run_fig1(cfg: &Fig1Config) -> Result<Vec<Fig1Run>> {
    let b = vec![1.0; FIG1_DIM];
    let mut runs = Vec::new();
    for system in build_fig1_matrices(cfg.seed)? {
        let outcome = minres_solve(&system.matrix, &b, &fig1_minres_config(cfg, false))?;
        let h = outcome
            .history
            .as_ref()
            .expect("diagnostics keep the history");
        let report = verify_run(
            &system.matrix,
            h,
            &VerifyOptions {
                x_star: fig1_solution(&system, &b),
                reference: true,
            },
        )?;
        runs.push(Fig1Run {
            system,
            outcome,
            report,
        });
    }
    Ok(runs)
}

/// Nonsingular systems have an exact solution; the singular one (a zero
/// eigenvalue with `b` not orthogonal to its eigenvector) has none.
fn fig1_solution(system: &Fig1System, b: &[f64]) -> Option<Vector<f64>> {
    if system.spectrum.contains(&0.0) {
        None
    } else {
        solve_full_pivot(&system.matrix.to_matrix(), b).ok()
    }
}

/// Writes `fig1_<system>.csv` (the plotted columns),
/// `fig1_<system>_trace.csv` (every monitored quantity) and the system
/// itself as `fig1_<system>.mtx`, plus the shared `fig1_rhs.txt`, into
/// `outdir`.
pub fn write_fig1(runs: &[Fig1Run], outdir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(outdir)?;
    let mut paths = Vec::new();
    let rhs = outdir.join("fig1_rhs.txt");
    save_vector(&[1.0; FIG1_DIM], &rhs)?;
    paths.push(rhs);
    for run in runs {
        let mtx = outdir.join(format!("fig1_{}.mtx", run.system.name));
        save_matrix_market(&run.system.matrix, &mtx)?;
        paths.push(mtx);
        let fig = outdir.join(format!("fig1_{}.csv", run.system.name));
        at_path(&fig, run.outcome.trace.write_figure_csv(create(&fig)?))?;
        let full = outdir.join(format!("fig1_{}_trace.csv", run.system.name));
        at_path(&full, run.outcome.trace.write_csv(create(&full)?))?;
        paths.push(fig);
        paths.push(full);
    }
    Ok(paths)
}

// ---------------------------------------------------------------------------
// Verification sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    /// Test hook: corrupt the Givens reflections to prove the suite bites.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub inject_givens_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 50,
            min_dim: 4,
            max_dim: 16,
            inject_givens_fault: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceVerdict {
    pub label: String,
    pub kind: String,
    pub dim: usize,
    pub checks_run: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportedViolation {
    pub instance: String,
    pub check: String,
    pub k: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub instances: usize,
    pub checks_run: usize,
    pub violations: usize,
    /// Violation count per assertion name.
    pub violated_checks: BTreeMap<String, usize>,
    /// The first few violations in full.
    pub first_violations: Vec<ReportedViolation>,
    pub per_instance: Vec<InstanceVerdict>,
}

const REPORTED_VIOLATIONS: usize = 25;

#[derive(Default)]
struct Sweep {
    checks_run: usize,
    violations: usize,
    violated_checks: BTreeMap<String, usize>,
    first: Vec<ReportedViolation>,
    per_instance: Vec<InstanceVerdict>,
}

impl Sweep {
    fn add(&mut self, label: String, kind: String, dim: usize, rep: CheckReport) {
        self.checks_run += rep.checks_run;
        self.violations += rep.violations.len();
        for v in &rep.violations {
            *self.violated_checks.entry(v.check.clone()).or_default() += 1;
            if self.first.len() < REPORTED_VIOLATIONS {
                self.first.push(ReportedViolation {
                    instance: label.clone(),
                    check: v.check.clone(),
                    k: v.k,
                    detail: v.detail.clone(),
                });
            }
        }
        self.per_instance.push(InstanceVerdict {
            label,
            kind,
            dim,
            checks_run: rep.checks_run,
            violations: rep.violations.len(),
        });
    }

    fn finish(self) -> VerifySummary {
        VerifySummary {
            passed: self.violations == 0,
            instances: self.per_instance.len(),
            checks_run: self.checks_run,
            violations: self.violations,
            violated_checks: self.violated_checks,
            first_violations: self.first,
            per_instance: self.per_instance,
        }
    }
}

/// What [`certify_psd`] must conclude for an instance whose spectrum and
/// right-hand side are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectedCertificate {
    /// Certified at exactly the grade of `b`.
    Psd { grade: usize },
    /// NPC at exactly the grade, with zero curvature (`b ∉ range(A)`).
    SingularNpc { grade: usize },
    /// Some NPC direction of genuinely nonpositive curvature.
    Npc,
}

impl ExpectedCertificate {
    pub fn for_instance(inst: &Instance<f64>) -> Self {
        match inst.kind {
            InstanceKind::PositiveDefinite | InstanceKind::PsdInRange => {
                Self::Psd { grade: inst.grade }
            }
            InstanceKind::PsdOutOfRange => Self::SingularNpc { grade: inst.grade },
            InstanceKind::Indefinite => Self::Npc,
        }
    }
}

/// Runs [`certify_psd`] and checks the verdict against `expected`. A
/// returned direction must have `⟨p, Ap⟩ ≤ 1e-8 ‖A‖_F ‖p‖²`; a singular
/// NPC must have `|curvature| ≤ 1e-8 β₁²`.
pub fn check_certificate(
    a: &DenseSymmetric<f64>,
    b: &[f64],
    expected: ExpectedCertificate,
    cfg: &MinresConfig<f64>,
) -> Result<CheckReport> {
    let mut rep = CheckReport::default();
    let cert = certify_psd(a, b, cfg)?;
    let beta1_sq = dot_raw(b, b);
    match (&cert, expected) {
        (PsdCertificate::CertifiedPsd { iterations }, ExpectedCertificate::Psd { grade }) => {
            rep.check(
                "certificate.psd_grade",
                *iterations,
                *iterations == grade,
                || format!("certified after {iterations} iterations, grade is {grade}"),
            );
        }
        (
            PsdCertificate::NpcFound {
                direction,
                iteration,
                curvature,
            },
            ExpectedCertificate::Npc | ExpectedCertificate::SingularNpc { .. },
        ) => {
            let k = *iteration;
            let ap = apply_operator(a, direction)?;
            let pap = dot_raw(direction, &ap);
            let bound = 1e-8 * a.frobenius() * dot_raw(direction, direction);
            rep.check("certificate.npc_curvature", k, pap <= bound, || {
                format!("⟨p, Ap⟩ = {pap:e} > {bound:e}")
            });
            if let ExpectedCertificate::SingularNpc { grade } = expected {
                rep.check("certificate.npc_grade", k, k == grade, || {
                    format!("NPC at {k}, grade is {grade}")
                });
                let bound = 1e-8 * beta1_sq;
                rep.check(
                    "certificate.npc_zero_curvature",
                    k,
                    curvature.abs() <= bound,
                    || format!("|curvature| = {:e} > 1e-8 β₁² = {bound:e}", curvature.abs()),
                );
            }
        }
        (other, expected) => {
            rep.check("certificate.verdict", 0, false, || {
                format!("expected {expected:?}, got {}", describe(other))
            });
        }
    }
    Ok(rep)
}

fn describe(c: &PsdCertificate<f64>) -> String {
    match c {
        PsdCertificate::CertifiedPsd { iterations } => format!("certified PSD at {iterations}"),
        PsdCertificate::NpcFound { iteration, .. } => format!("NPC at {iteration}"),
        PsdCertificate::Inconclusive { iterations } => format!("inconclusive after {iterations}"),
    }
}

fn kind_name(kind: InstanceKind) -> &'static str {
    match kind {
        InstanceKind::PositiveDefinite => "positive_definite",
        InstanceKind::Indefinite => "indefinite",
        InstanceKind::PsdInRange => "psd_in_range",
        InstanceKind::PsdOutOfRange => "psd_out_of_range",
    }
}

/// Runs the solver in both stopping modes and feeds every history to the
/// oracle suite. Solver errors are reported as violations, not propagated.
fn verify_system(
    a: &DenseSymmetric<f64>,
    b: &[f64],
    x_star: Option<Vector<f64>>,
    expected: ExpectedCertificate,
    base: &MinresConfig<f64>,
) -> Result<CheckReport> {
    let mut rep = CheckReport::default();
    for stop_on_npc in [true, false] {
        let cfg = MinresConfig {
            rtol: 0.0,
            stop_on_npc,
            ..base.clone()
        };
        match minres_solve(a, b, &cfg) {
            Ok(out) => {
                let h = out.history.as_ref().expect("diagnostics keep the history");
                rep.merge(verify_run(
                    a,
                    h,
                    &VerifyOptions {
                        x_star: x_star.clone(),
                        reference: true,
                    },
                )?);
            }
            Err(e) => rep.check("solver.error", 0, false, || e.to_string()),
        }
    }
    match check_certificate(a, b, expected, base) {
        Ok(r) => rep.merge(r),
        Err(e) => rep.check("solver.error", 0, false, || e.to_string()),
    }
    Ok(rep)
}

/// `trials` random instances (each family equally likely, `d` uniform in
/// `[min_dim, max_dim]`) plus the three spectral-experiment systems.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifySummary> {
    if cfg.min_dim < 2 || cfg.min_dim > cfg.max_dim {
        return Err(Error::Validation(format!(
            "dimension range [{}, {}] must satisfy 2 ≤ min ≤ max",
            cfg.min_dim, cfg.max_dim
        )));
    }
    let base = MinresConfig {
        reorthogonalize: true,
        diagnostics: true,
        givens_fault: cfg.inject_givens_fault,
        ..MinresConfig::default()
    };
    let mut sweep = Sweep::default();
    let mut rng = SeededRng::new(cfg.seed);
    for t in 0..cfg.trials {
        let d = rng.int_in(cfg.min_dim, cfg.max_dim);
        let inst = match rng.int_in(0, 3) {
            0 => positive_definite(&mut rng, d),
            1 => indefinite(&mut rng, d),
            2 => psd_in_range(&mut rng, d),
            _ => psd_out_of_range(&mut rng, d),
        };
        let rep = verify_system(
            &inst.matrix,
            &inst.rhs,
            inst.solution(),
            ExpectedCertificate::for_instance(&inst),
            &base,
        )?;
        sweep.add(format!("trial {t}"), kind_name(inst.kind).into(), d, rep);
    }
    let b = vec![1.0; FIG1_DIM];
    for system in build_fig1_matrices(cfg.seed)? {
        let expected = if system.spectrum.contains(&0.0) {
            ExpectedCertificate::SingularNpc { grade: FIG1_DIM }
        } else {
            ExpectedCertificate::Npc
        };
        let rep = verify_system(
            &system.matrix,
            &b,
            fig1_solution(&system, &b),
            expected,
            &base,
        )?;
        sweep.add(
            format!("fig1 {}", system.name),
            "spectral_experiment".into(),
            FIG1_DIM,
            rep,
        );
    }
    Ok(sweep.finish())
}

// ---------------------------------------------------------------------------
// Newton-MR comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSpec {
    /// Label-first CSV file; the synthetic generator is used when absent.
    pub path: Option<PathBuf>,
    pub n: usize,
    pub d: usize,
    /// Distance between the two blob means.
    pub separation: f64,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            path: None,
            n: 500,
            d: 20,
            separation: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Zero,
    /// `−scale · 𝟙/√d`: for the synthetic blobs, the reverse of the
    /// direction separating the class means.
    Flipped,
    /// See [`adversarial_start`].
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StartSpec {
    pub kind: StartKind,
    pub scale: f64,
}

impl Default for StartSpec {
    fn default() -> Self {
        Self {
            kind: StartKind::Flipped,
            scale: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonExperimentConfig {
    pub seed: u64,
    pub data: DataSpec,
    pub start: StartSpec,
    pub regularizers: Vec<Regularizer>,
    pub variants: Vec<Variant>,
    pub newton: NewtonConfig,
}

impl Default for NewtonExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            data: DataSpec::default(),
            start: StartSpec::default(),
            regularizers: Regularizer::ALL.to_vec(),
            variants: vec![Variant::Npc, Variant::Grad],
            newton: NewtonConfig::default(),
        }
    }
}

impl NewtonExperimentConfig {
    /// Parses TOML; missing keys take their defaults, unknown keys are an
    /// error that lists all of them.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::Validation(format!("malformed config: {e}")))?;
        let mut unknown = Vec::new();
        let cfg: Self = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
            .map_err(|e| Error::Validation(format!("malformed config: {e}")))?;
        if !unknown.is_empty() {
            return Err(Error::Validation(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.data.path.is_none() && (self.data.n == 0 || self.data.d == 0) {
            bad.push("data.n and data.d must be positive");
        }
        if !(self.data.separation >= 0.0) {
            bad.push("data.separation must be non-negative");
        }
        if !(self.start.scale.is_finite()) {
            bad.push("start.scale must be finite");
        }
        if self.regularizers.is_empty() {
            bad.push("regularizers must not be empty");
        }
        if self.variants.is_empty() {
            bad.push("variants must not be empty");
        }
        if !bad.is_empty() {
            return Err(Error::Validation(bad.join("; ")));
        }
        self.newton.line_search.validate()
    }

    pub fn dataset(&self) -> Result<Dataset<f64>> {
        match &self.data.path {
            Some(p) => load_csv_dataset(p),
            None => two_blobs(self.data.n, self.data.d, self.data.separation, self.seed),
        }
    }

    pub fn start_point(&self, data: &Dataset<f64>) -> Result<Vector<f64>> {
        match self.start.kind {
            StartKind::Zero => Ok(vec![0.0; data.dim()]),
            StartKind::Flipped => {
                let d = data.dim();
                Ok(vec![-self.start.scale / (d as f64).sqrt(); d])
            }
            StartKind::Adversarial => adversarial_start(data, self.start.scale),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonRunSummary {
    pub regularizer: Regularizer,
    pub variant: Variant,
    pub status: RunStatus,
    pub outer_iterations: usize,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub npc_steps: usize,
    pub oracle_calls: usize,
    /// Every accepted step decreased `f` (by the cancellation-free change).
    pub f_decreasing: bool,
}

impl NewtonRunSummary {
    pub fn of(trace: &OptimizerTrace) -> Self {
        let last = trace.final_record();
        Self {
            regularizer: trace.regularizer,
            variant: trace.variant,
            status: trace.status,
            outer_iterations: trace.records.len() - 1,
            final_f: last.f,
            final_grad_norm: last.grad_norm,
            npc_steps: trace.npc_steps(),
            oracle_calls: trace.total_oracle_calls(),
            f_decreasing: trace
                .records
                .iter()
                .filter_map(|r| r.f_change)
                .all(|c| c <= 0.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrefixCheck {
    pub regularizer: Regularizer,
    /// Rows shared bit for bit, or the first discrepancy.
    pub shared_rows: std::result::Result<usize, String>,
}

#[derive(Debug, Clone)]
pub struct NewtonExperiment {
    pub traces: Vec<OptimizerTrace>,
    pub prefix_checks: Vec<PrefixCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonExperimentSummary {
    pub runs: Vec<NewtonRunSummary>,
    pub prefix_checks: Vec<PrefixCheck>,
}

impl NewtonExperiment {
    pub fn summary(&self) -> NewtonExperimentSummary {
        NewtonExperimentSummary {
            runs: self.traces.iter().map(NewtonRunSummary::of).collect(),
            prefix_checks: self.prefix_checks.clone(),
        }
    }

    pub fn trace(&self, reg: Regularizer, variant: Variant) -> Option<&OptimizerTrace> {
        self.traces
            .iter()
            .find(|t| t.regularizer == reg && t.variant == variant)
    }
}

/// Every configured variant on every configured regularizer, all from the
/// same data and start; with both variants present, also checks the
/// identical-prefix property per regularizer.
pub fn run_newton_experiment(cfg: &NewtonExperimentConfig) -> Result<NewtonExperiment> {
    cfg.validate()?;
    let data = cfg.dataset()?;
    let w0 = cfg.start_point(&data)?;
    let mut traces = Vec::new();
    let mut prefix_checks = Vec::new();
    for &reg in &cfg.regularizers {
        let prob = NlsProblem::new(data.clone(), reg);
        let start = traces.len();
        for &variant in &cfg.variants {
            traces.push(newton_mr_run(&prob, &w0, variant, &cfg.newton)?.trace);
        }
        let runs = &traces[start..];
        let npc = runs.iter().find(|t| t.variant == Variant::Npc);
        let grad = runs.iter().find(|t| t.variant == Variant::Grad);
        if let (Some(a), Some(b)) = (npc, grad) {
            prefix_checks.push(PrefixCheck {
                regularizer: reg,
                shared_rows: identical_prefix(a, b),
            });
        }
    }
    Ok(NewtonExperiment {
        traces,
        prefix_checks,
    })
}

/// Writes `newton_<regularizer>_<variant>.csv` per run into `outdir`.
pub fn write_newton(exp: &NewtonExperiment, outdir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(outdir)?;
    let mut paths = Vec::new();
    for t in &exp.traces {
        let path = outdir.join(format!("newton_{}_{}.csv", t.regularizer, t.variant));
        at_path(&path, t.write_csv(create(&path)?))?;
        paths.push(path);
    }
    Ok(paths)
}
