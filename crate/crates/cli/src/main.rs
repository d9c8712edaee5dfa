use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use npc_minres::experiments::{
    run_fig1, run_newton_experiment, run_verify, write_fig1, write_newton, Fig1Config,
    NewtonExperimentConfig, RunRecord, VerifyConfig,
};
use npc_minres::io::{load_matrix, load_vector, save_vector};
use npc_minres::{
    minres_solve, norm, DenseSymmetric, MinresConfig, OutcomeKind, SymmetricOperator,
};

#[derive(Parser)]
#[command(
    name = "npc-minres",
    version,
    about = "MINRES with nonpositive-curvature detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral trace experiment on three 20×20 systems; writes CSV traces
    /// and the systems themselves.
    Fig1(Fig1Args),
    /// Newton-MR against Newton-MR-grad on each regularizer.
    Newton(NewtonArgs),
    /// Solve `Ax = b` for a symmetric matrix read from disk.
    Solve(SolveArgs),
    /// Run the brute-force oracle suite on random systems; exits 1 on any
    /// violation.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Fig1Args {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out/fig1")]
    out: PathBuf,
    /// Relative residual tolerance; 0 runs to the grade.
    #[arg(long, default_value_t = 0.0)]
    rtol: f64,
    #[arg(long)]
    maxit: Option<usize>,
    /// Skip full reorthogonalization of the Lanczos basis.
    #[arg(long)]
    no_reorth: bool,
}

#[derive(Args)]
struct NewtonArgs {
    /// TOML configuration; defaults are used when omitted.
    config: Option<PathBuf>,
    #[arg(long, default_value = "out/newton")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    /// Matrix Market file (`%%MatrixMarket` header) or dense whitespace text.
    matrix: PathBuf,
    /// Right-hand side, one value per line; all ones when omitted.
    rhs: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long)]
    maxit: Option<usize>,
    /// Return the NPC direction as soon as it is detected (default).
    #[arg(long, overrides_with = "continue_past_npc")]
    stop_on_npc: bool,
    /// Record NPC detections but keep iterating.
    #[arg(long = "continue", overrides_with = "stop_on_npc")]
    continue_past_npc: bool,
    #[arg(long)]
    reorth: bool,
    /// Where to write the solution (or NPC direction, when one is returned).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the run record as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 4)]
    min_dim: usize,
    #[arg(long, default_value_t = 16)]
    max_dim: usize,
    #[arg(long, hide = true)]
    inject_givens_fault: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            // Library errors already embed their I/O source in the message.
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg += ": ";
                    }
                    msg += &cause;
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Fig1(args) => fig1(args),
        Command::Newton(args) => newton(args),
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify(args),
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn fig1(args: Fig1Args) -> Result<ExitCode> {
    let config = Fig1Config {
        seed: args.seed,
        rtol: args.rtol,
        maxit: args.maxit,
        reorthogonalize: !args.no_reorth,
    };
    let runs = run_fig1(&config)?;
    let outputs = write_fig1(&runs, &args.out)?;
    let record = RunRecord {
        experiment: "fig1".into(),
        config,
        outputs,
        summary: runs.iter().map(|r| r.summary()).collect::<Vec<_>>(),
    };
    print_json(&record)?;
    Ok(ExitCode::SUCCESS)
}

fn newton(args: NewtonArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => NewtonExperimentConfig::load(path)?,
        None => NewtonExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let exp = run_newton_experiment(&config)?;
    let outputs = write_newton(&exp, &args.out)?;
    let record = RunRecord {
        experiment: "newton".into(),
        config,
        outputs,
        summary: exp.summary(),
    };
    print_json(&record)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SolveConfig {
    matrix: PathBuf,
    rhs: Option<PathBuf>,
    rtol: f64,
    maxit: Option<usize>,
    stop_on_npc: bool,
    reorthogonalize: bool,
}

#[derive(Serialize)]
struct SolveSummary {
    dim: usize,
    outcome: OutcomeKind,
    iterations: usize,
    matvecs: usize,
    relative_residual: f64,
    /// `‖b − Ax‖ / ‖b‖` recomputed from the returned `x`.
    explicit_relative_residual: f64,
    first_npc: Option<usize>,
    npc_curvature: Option<f64>,
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let a: DenseSymmetric<f64> = with_file(&args.matrix, load_matrix(&args.matrix))?;
    let b = match &args.rhs {
        Some(path) => with_file(path, load_vector(path))?,
        None => vec![1.0; a.dim()],
    };
    if b.len() != a.dim() {
        bail!(
            "right-hand side has {} entries but the matrix is {}×{}",
            b.len(),
            a.dim(),
            a.dim()
        );
    }
    let config = SolveConfig {
        matrix: args.matrix.clone(),
        rhs: args.rhs.clone(),
        rtol: args.rtol,
        maxit: args.maxit,
        stop_on_npc: !args.continue_past_npc,
        reorthogonalize: args.reorth,
    };
    let out = minres_solve(
        &a,
        &b,
        &MinresConfig {
            rtol: config.rtol,
            maxit: config.maxit,
            stop_on_npc: config.stop_on_npc,
            reorthogonalize: config.reorthogonalize,
            ..MinresConfig::default()
        },
    )?;

    let mut ax = vec![0.0; a.dim()];
    a.apply_to(&out.x, &mut ax);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let summary = SolveSummary {
        dim: a.dim(),
        outcome: out.kind,
        iterations: out.iterations,
        matvecs: out.matvecs,
        relative_residual: out.relative_residual(),
        explicit_relative_residual: norm(&r) / norm(&b),
        first_npc: out.first_npc,
        npc_curvature: out.npc_curvature,
    };

    let mut outputs = Vec::new();
    if let Some(path) = &args.out {
        let v = match (&out.kind, &out.npc_direction) {
            (OutcomeKind::NpcDirection, Some(p)) => p,
            _ => &out.x,
        };
        write_result(v, path)?;
        outputs.push(path.clone());
    }

    if args.json {
        print_json(&RunRecord {
            experiment: "solve".into(),
            config,
            outputs,
            summary,
        })?;
    } else {
        let mut text = format!(
            "outcome: {}\niterations: {}\nrelative residual: {:e}\n",
            summary.outcome, summary.iterations, summary.relative_residual
        );
        if let Some(k) = summary.first_npc {
            text += &format!("first npc: {k}\n");
        }
        if let Some(c) = summary.npc_curvature {
            text += &format!("npc curvature: {c:e}\n");
        }
        for path in &outputs {
            let what = if summary.outcome == OutcomeKind::NpcDirection {
                "npc direction"
            } else {
                "solution"
            };
            text += &format!("{what}: {}\n", path.display());
        }
        emit(&text)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Names the file in content errors; I/O errors already carry the path.
fn with_file<T>(path: &Path, r: npc_minres::Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ npc_minres::Error::Io { .. } => anyhow::Error::new(e),
        e => anyhow::Error::new(e).context(path.display().to_string()),
    })
}

fn write_result(v: &[f64], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_vector(v, path)?;
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let config = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        min_dim: args.min_dim,
        max_dim: args.max_dim,
        inject_givens_fault: args.inject_givens_fault,
    };
    let summary = run_verify(&config)?;
    let passed = summary.passed;
    print_json(&RunRecord {
        experiment: "verify".into(),
        config,
        outputs: Vec::new(),
        summary,
    })?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
