//! `finitegap`: equilibrium measures, isospectral tori, orthogonal
//! polynomials and sum-rule experiments from JSON configs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{config_hash, Overrides, RawConfig};
use output::Meta;

#[derive(Debug, Parser)]
#[command(
    name = "finitegap",
    version,
    about = "Finite-gap Jacobi matrices: potential theory, isospectral tori, sum rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration of the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (the scanned directory for `report`).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Replaces the seed of random perturbations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override: equilibrium refinement, series tolerance or
    /// torus search step, depending on the subcommand.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Initial quadrature nodes per band and gap for the equilibrium solve.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Equilibrium measure, capacity, potential and Green's function.
    Eqm,
    /// Coefficients of an isospectral torus point.
    Torus,
    /// Orthonormal polynomials at complex points.
    Oprl,
    /// Coefficients of a perturbed matrix.
    Perturb,
    /// Sum-rule experiments.
    Sumrule,
    /// Distance to the isospectral torus.
    Distance,
    /// Summary of the verdicts in earlier outputs.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Eqm => "eqm",
            Command::Torus => "torus",
            Command::Oprl => "oprl",
            Command::Perturb => "perturb",
            Command::Sumrule => "sumrule",
            Command::Distance => "distance",
            Command::Report => "report",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    BadInput(String),
    Missing(String),
    Violation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::BadInput(_) => 2,
            CliError::Missing(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::BadInput(m) | CliError::Missing(m) | CliError::Violation(m) => f.write_str(m),
        }
    }
}

impl From<finitegap::error::Error> for CliError {
    fn from(e: finitegap::error::Error) -> Self {
        match e {
            finitegap::error::Error::Invariant(_) => CliError::Violation(e.to_string()),
            _ => CliError::BadInput(e.to_string()),
        }
    }
}

impl From<String> for CliError {
    fn from(m: String) -> Self {
        CliError::BadInput(m)
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let o = Overrides { seed: cli.seed, tol: cli.tol, nodes: cli.nodes };
    o.validate()?;
    let name = cli.command.name();
    let outcome = if let Command::Report = cli.command {
        let raw = cli.config.as_deref().map(RawConfig::load).transpose()?;
        let (files, listing) = commands::report_inputs(raw.as_ref(), &cli.out)?;
        let meta = Meta::new(name, config_hash(name, &listing, &o));
        commands::report(&files, &meta)?
    } else {
        let path = cli.config.as_deref().ok_or_else(|| CliError::BadInput(format!("`{name}` needs --config")))?;
        let raw = RawConfig::load(path)?;
        let meta = Meta::new(name, config_hash(name, &raw.value, &o));
        match cli.command {
            Command::Eqm => commands::eqm(&raw, &o, &meta)?,
            Command::Torus => commands::torus(&raw, &o, &meta)?,
            Command::Oprl => commands::oprl(&raw, &o, &meta)?,
            Command::Perturb => commands::perturb(&raw, &o, &meta)?,
            Command::Sumrule => commands::sumrule(&raw, &o, &meta)?,
            Command::Distance => commands::distance(&raw, &o, &meta)?,
            Command::Report => unreachable!(),
        }
    };
    let written = output::write_all(&cli.out, &outcome.artifacts)
        .map_err(|e| CliError::BadInput(format!("cannot write to {}: {e}", cli.out.display())))?;
    if !cli.quiet {
        for line in &outcome.summary {
            eprintln!("{line}");
        }
        for f in &written {
            eprintln!("wrote {f}");
        }
    }
    Ok(outcome.violation)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: hard invariant violation, see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
