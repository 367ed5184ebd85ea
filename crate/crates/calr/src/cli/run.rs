//! Argument parsing, dispatch and exit codes.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::cli::config::{Config, SweepSpec};
use crate::cli::output::{sweep_csv, sweep_svg, to_json, write_file, FieldDump};
use crate::cli::verify::{parse_suites, run_suite, table, CheckLine};
use crate::error::{CalrError, Result};
use crate::resonance::{classify_with, far_field_behaviour, run_sweep, ClassifierPolicy};
use crate::spectral::system::solve_field;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_ASSERTION: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "calr", version, about = "Anomalous localized resonance in radially layered media")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve at one loss parameter and dump the per-mode coefficients as JSON.
    Solve(SolveArgs),
    /// Sweep the loss parameter and write the CSV table.
    Sweep(SweepArgs),
    /// Run built-in verification suites; exits 3 on any failure.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub delta: f64,
    /// Degree cutoff (overrides the config).
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub delta_start: Option<f64>,
    #[arg(long)]
    pub delta_end: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a JSON report with the verdict and far-field behaviour.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write an SVG plot of the sweep curves.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated list of three-spheres, modes, rigidity, singularity (or `all`).
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Also write the table as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code for a library error.
pub fn exit_code(e: &CalrError) -> u8 {
    match e {
        CalrError::Domain(_) | CalrError::Validation(_) | CalrError::Io(_) | CalrError::Insufficient(_) => {
            EXIT_VALIDATION
        }
        CalrError::ResonanceSingular { .. } | CalrError::Solver { .. } | CalrError::Integrator(_) => EXIT_SOLVER,
    }
}

/// Caps the global rayon pool at `CALR_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("CALR_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CalrError::Validation(format!("CALR_THREADS must be a positive integer, got '{v}'")))?;
    // a pool already built by an earlier call is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the command line; writes diagnostics to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Verify(a) => verify(a, out),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "calr: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point of the `calr` binary.
pub fn main_entry() -> ExitCode {
    ExitCode::from(run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr()))
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<u8> {
    let mut cfg = Config::load(&a.config)?;
    if let Some(m) = a.modes {
        cfg.cutoff = m;
    }
    cfg.validate()?;
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(CalrError::Validation(format!("delta must lie in (0, 1), got {}", a.delta)));
    }
    let medium = cfg.medium()?;
    let field = solve_field(&medium, &cfg.spectrum()?, a.delta, cfg.cutoff)?;
    write_file(&a.out, &to_json(&FieldDump::new(&field, &medium))?)?;
    writeln!(out, "wrote {} modes to {}", field.modes().len(), a.out.display())?;
    Ok(EXIT_OK)
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<u8> {
    let mut cfg = Config::load(&a.config)?;
    if let Some(m) = a.modes {
        cfg.cutoff = m;
    }
    cfg.validate()?;
    let spec = SweepSpec {
        delta_start: a.delta_start.unwrap_or(cfg.sweep.delta_start),
        delta_end: a.delta_end.unwrap_or(cfg.sweep.delta_end),
        points: a.points.unwrap_or(cfg.sweep.points),
        policy: cfg.sweep.policy,
    };
    let deltas = spec.deltas()?;
    let medium = cfg.medium()?;
    let sweep = run_sweep(&medium, &cfg.spectrum()?, &deltas, cfg.cutoff)?;
    write_file(&a.out, &sweep_csv(&sweep.rows))?;
    writeln!(out, "wrote {} rows to {}", sweep.rows.len(), a.out.display())?;
    let policy = spec.policy.unwrap_or_default();
    match classify_with(&sweep.rows, &policy) {
        Ok(v) => writeln!(out, "verdict: {:?} (slope {:.4}, variation {:.4})", v.class, v.slope, v.variation)?,
        Err(e) => writeln!(out, "verdict: unavailable ({e})")?,
    }
    if let Some(path) = &a.report {
        let report = SweepReport {
            config: &cfg,
            policy,
            verdict: classify_with(&sweep.rows, &policy).ok(),
            far_field: far_field_behaviour(&sweep).ok(),
        };
        write_file(path, &to_json(&report)?)?;
    }
    if let Some(path) = &a.plot {
        sweep_svg(&sweep.rows, path)?;
    }
    Ok(EXIT_OK)
}

#[derive(serde::Serialize)]
struct SweepReport<'a> {
    config: &'a Config,
    policy: ClassifierPolicy,
    verdict: Option<crate::resonance::Verdict>,
    far_field: Option<crate::resonance::FarFieldBehaviour>,
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<u8> {
    let suites = parse_suites(&a.suite)?;
    let mut lines = Vec::new();
    for s in suites {
        let l = run_suite(s, a.seed)?;
        write!(out, "{}", table(&l))?;
        lines.extend(l);
    }
    if let Some(path) = &a.out {
        write_file(path, &to_json(&lines)?)?;
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    writeln!(out, "{} checks, {} failed", lines.len(), failed)?;
    Ok(verdict_code(&lines))
}

/// `EXIT_ASSERTION` when any check failed.
pub fn verdict_code(lines: &[CheckLine]) -> u8 {
    if lines.iter().all(|l| l.passed) {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}
