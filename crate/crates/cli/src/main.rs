//! Scenario runner: one subcommand per figure family. Configs are TOML with
//! explicit units in key names; outputs are deterministic CSV/JSON artifacts
//! plus a manifest listing every file with a content hash.

mod config;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::Kind;

#[derive(Debug)]
pub enum CliError {
    /// Configuration / schema problems: exit code 2.
    Config(String),
    /// Numerical failures (truncation, non-convergence): exit code 3.
    Numerical(String),
}

impl CliError {
    /// Core errors raised while ingesting input files are schema problems.
    fn config_from_core(e: spincat::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<spincat::Error> for CliError {
    fn from(e: spincat::Error) -> Self {
        match e {
            spincat::Error::InvalidParameter(_)
            | spincat::Error::InvalidTrace(_)
            | spincat::Error::CsvParse { .. }
            | spincat::Error::OutOfRange { .. }
            | spincat::Error::TooFewPoints { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "spincat",
    version,
    about = "Trapped-ion squeezed cat-state scenarios: simulate, export, fit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the artifacts and the manifest.
    #[arg(long)]
    out: PathBuf,
    /// Random seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensembles and grids (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Spin population vs force duration for a set of squeeze geometries.
    OverlapScan(CommonArgs),
    /// Spin population vs bichromatic phase at fixed duration.
    PhaseScan(CommonArgs),
    /// Force-and-return pulse sequence time series.
    Revival(CommonArgs),
    /// Sideband readout trace from a displaced-squeezed state.
    Bsb(CommonArgs),
    /// Husimi distribution of a displaced-squeezed state on a grid.
    Qfunc(CommonArgs),
    /// Noise-averaged pulse-sequence ensemble.
    NoiseSim(CommonArgs),
    /// Parameter estimation from a trace or distribution file.
    Fit(CommonArgs),
}

impl Command {
    fn split(&self) -> (Kind, &CommonArgs) {
        match self {
            Command::OverlapScan(a) => (Kind::OverlapScan, a),
            Command::PhaseScan(a) => (Kind::PhaseScan, a),
            Command::Revival(a) => (Kind::Revival, a),
            Command::Bsb(a) => (Kind::Bsb, a),
            Command::Qfunc(a) => (Kind::Qfunc, a),
            Command::NoiseSim(a) => (Kind::NoiseSim, a),
            Command::Fit(a) => (Kind::Fit, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn execute(kind: Kind, args: &CommonArgs) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    let started = Instant::now();
    let raw = config::load(&args.config)?;
    if raw.kind != kind {
        return Err(CliError::Config(format!(
            "config kind {:?} does not match the `{}` subcommand",
            raw.kind.as_str(),
            kind.as_str()
        )));
    }
    let seed = args.seed.or(raw.seed).unwrap_or(0);

    // Compute everything before touching the filesystem; a failed run leaves
    // no partial outputs.
    let artifacts = match kind {
        Kind::OverlapScan => run::overlap_scan(&raw, seed)?,
        Kind::PhaseScan => run::phase_scan(&raw, seed)?,
        Kind::Revival => run::revival(&raw, seed)?,
        Kind::Bsb => run::bsb(&raw, seed)?,
        Kind::Qfunc => run::qfunc(&raw, seed)?,
        Kind::NoiseSim => run::noise_sim(&raw, seed)?,
        Kind::Fit => run::fit(&raw, seed)?,
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", args.out.display())))?;
    for a in &artifacts {
        std::fs::write(args.out.join(&a.name), &a.bytes)
            .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", a.name)))?;
    }
    let manifest = manifest::render(
        kind.as_str(),
        seed,
        &raw.text,
        &artifacts,
        started.elapsed(),
    );
    std::fs::write(args.out.join("manifest.json"), manifest)
        .map_err(|e| CliError::Numerical(format!("cannot write manifest: {e}")))?;
    Ok(())
}
