//! `diracgap`: runs one experiment and writes its CSV tables, `summary.json`
//! and `manifest.json` to the output directory.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Parser, Subcommand};
use diracgap::counterexample::WELL_SOLVE_TOL;
use diracgap::eigen::{InteriorOptions, DENSE_EIG_LIMIT};
use diracgap::evolution::ANNIHILATION_TOL;
use diracgap::homogenization::{DECREASE_TOL, EIGENSPACE_TOL, POINT_CAP};
use diracgap::resolvent::RESOLVENT_TOL;
use diracgap::spectral::{COMMUTATION_TOL, DENSE_CHECK_LIMIT};
use serde_json::json;
use thiserror::Error;

use config::ExperimentConfig;
use experiments::Outcome;
use output::write_json;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Experiment(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "diracgap", version, about = "Gapped Dirac operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; every section is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the random probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Algebraic, projector, resolvent and unitarity checks on a coarse grid.
    Validate,
    /// Gap eigenvalues and spectral counts of the configured operator.
    Spectrum,
    /// Homogenization sweep over `sweep.h_list`.
    Sweep,
    /// Time evolution against the homogenized flow.
    Evolve,
    /// Resolvent convergence without spectral convergence.
    Counterexample,
}

impl Command {
    fn kind(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Evolve => "evolve",
            Command::Counterexample => "counterexample",
        }
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn tolerances(cfg: &ExperimentConfig) -> serde_json::Value {
    let opts = InteriorOptions::default();
    json!({
        "RESOLVENT_TOL": RESOLVENT_TOL,
        "EIGENSPACE_TOL": EIGENSPACE_TOL,
        "DECREASE_TOL": DECREASE_TOL,
        "POINT_CAP": POINT_CAP,
        "DENSE_EIG_LIMIT": DENSE_EIG_LIMIT,
        "DENSE_CHECK_LIMIT": DENSE_CHECK_LIMIT,
        "COMMUTATION_TOL": COMMUTATION_TOL,
        "ANNIHILATION_TOL": ANNIHILATION_TOL,
        "WELL_SOLVE_TOL": WELL_SOLVE_TOL,
        "interior": { "edge_margin": opts.edge_margin, "max_iterations": opts.max_iterations },
        "epsilon_reg": cfg.potential.resolved_epsilon(cfg.grid().dx()),
        "thresholds": experiments::thresholds(),
    })
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads: must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;

    let kind = cli.command.kind();
    let started = now();
    let result = match cli.command {
        Command::Validate => experiments::validate(&cfg, cli.seed),
        Command::Spectrum => experiments::spectrum(&cfg),
        Command::Sweep => experiments::sweep(&cfg),
        Command::Evolve => experiments::evolve(&cfg),
        Command::Counterexample => experiments::counterexample(&cfg),
    };

    let mut files = Vec::new();
    let mut error = None;
    let mut passed = false;
    match &result {
        Ok(Outcome { summary, tables }) => {
            for t in tables {
                t.write(&dir)?;
                files.push(t.name().to_string());
            }
            write_json(&dir.join("summary.json"), summary)?;
            files.push("summary.json".into());
            passed = summary.passed;
            for p in &summary.properties {
                println!(
                    "{} {}: value {:e} threshold {:e} {}",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.name,
                    p.value,
                    p.threshold,
                    p.detail
                );
            }
            if !summary.passed {
                eprintln!("failing properties: {}", summary.failing.join(", "));
            }
        }
        Err(e) => error = Some(e.to_string()),
    }
    files.push("manifest.json".into());
    let manifest = json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "kind": kind,
        "started": started,
        "finished": now(),
        "config": cfg,
        "seed": cli.seed,
        "threads": rayon::current_num_threads(),
        "tolerances": tolerances(&cfg),
        "files": files,
        "error": error,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    result.map(|_| passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
