//! Command-line front end: JSON configs in, CSV series and JSON summaries
//! out.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "vortex", version, about = "Point-vortex experiments on tori and planar domains")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for independent orbits.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a vortex configuration on a torus.
    Simulate,
    /// Poincaré section of single-vortex orbits.
    Section,
    /// Single-vortex equilibria (critical points of the Robin function).
    Equilibria,
    /// Tabulate the Green or Robin function on a grid.
    GreensTable,
    /// Reduced vortex dynamics in an annulus.
    Annulus,
    /// Run the golden-value checks.
    Verify {
        /// Deliberately break a component to exercise the checks.
        #[arg(long, hide = true, value_enum)]
        inject: Option<verify::Mutation>,
    },
}

/// Failure with its exit code: configuration problems exit 2, numerical
/// failures exit 3.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config { message: String, key: Option<String> },
    Numerical { message: String },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            message: message.into(),
            key: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            kind: &'a str,
            message: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            key: Option<&'a str>,
            exit_code: i32,
        }
        let (kind, message, key) = match self {
            CliError::Config { message, key } => ("config", message.as_str(), key.as_deref()),
            CliError::Numerical { message } => ("numerical", message.as_str(), None),
        };
        let rec = Record {
            kind,
            message,
            key,
            exit_code: self.exit_code(),
        };
        serde_json::json!({ "error": rec }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config { message, .. } => write!(f, "configuration error: {message}"),
            CliError::Numerical { message } => write!(f, "numerical error: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<vortex_core::Error> for CliError {
    fn from(e: vortex_core::Error) -> Self {
        use vortex_core::Error as E;
        match e {
            E::InvalidInput(_) | E::DegenerateLattice { .. } | E::DetNotOne { .. } | E::NonPositiveDensity { .. } => {
                CliError::config(e.to_string())
            }
            _ => CliError::Numerical { message: e.to_string() },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Files written by a successful run.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> CliResult<Artifacts> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let needs_config = || {
        cli.config
            .as_deref()
            .ok_or_else(|| CliError::config("--config <path> is required for this subcommand"))
    };
    match &cli.command {
        Command::Simulate => commands::simulate(&config::load(needs_config()?, "simulate")?, &cli.out),
        Command::Section => commands::section(&config::load(needs_config()?, "section")?, &cli.out),
        Command::Equilibria => commands::equilibria(&config::load(needs_config()?, "equilibria")?, &cli.out),
        Command::GreensTable => commands::greens_table(&config::load(needs_config()?, "greens-table")?, &cli.out),
        Command::Annulus => commands::annulus(&config::load(needs_config()?, "annulus")?, &cli.out),
        Command::Verify { inject } => {
            let report = verify::run(*inject);
            for item in &report.items {
                println!("{}", item.line());
            }
            let art = Artifacts {
                files: vec![output::write_json(&cli.out, "verify.json", &report)?],
            };
            if report.all_passed() {
                Ok(art)
            } else {
                Err(CliError::Numerical {
                    message: format!("{} golden checks failed", report.failures()),
                })
            }
        }
    }
}
