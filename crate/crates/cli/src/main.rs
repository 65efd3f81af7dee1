//! `rstsim`: sampling, tree construction and Monte Carlo runs for radial
//! spanning trees. Exit codes: 0 success, 2 usage, 3 invariant violation, 4 I/O.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::SimArgs;

#[derive(Parser, Debug)]
#[command(name = "rstsim", version, about = "Radial spanning tree simulations")]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "RST_OUT_DIR")]
    out: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a Palm Poisson point set into points.csv.
    Sample {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Build the RST of a points file into tree.csv and check its invariants.
    Build {
        #[arg(long)]
        points: PathBuf,
        /// Window radius of the points (default: largest norm).
        #[arg(long)]
        radius: Option<f64>,
        /// Also write the directed spanning forest to dsf.csv.
        #[arg(long)]
        dsf: bool,
        /// Compare with the quadratic reference builder.
        #[arg(long)]
        check_oracle: bool,
    },
    /// Monte Carlo replicates: report.json plus raw CSVs.
    Mc {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        replicates: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Re-check the RST property and non-crossing on every replicate.
        #[arg(long)]
        verify: bool,
    },
    /// Interface traces and sectors of one tree.
    Interfaces {
        #[command(flatten)]
        sim: SimArgs,
        /// Use this points file instead of sampling.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Crossing counts of one tree on the radius grid into chi.csv.
    Chi {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Beta moment fits of a sectors.csv file.
    Fit {
        #[arg(long)]
        sectors: PathBuf,
    },
    /// Deterministic configurations with exactly one or two children of the origin.
    Scenario {
        #[command(subcommand)]
        which: Scenario,
    },
}

#[derive(Subcommand, Debug)]
enum Scenario {
    /// Six-point chain whose RST has a single child of the origin.
    M1 {
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
    /// Cardioid configuration whose RST has two children of the origin.
    M2 {
        #[arg(long, default_value_t = 5.0)]
        r1: f64,
        #[arg(long, default_value_t = 5.0)]
        r2: f64,
        /// Default: 0.02 * min(r1, r2).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = std::f64::consts::PI / 64.0)]
        angle_step: f64,
    },
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const USAGE: u8 = 2;
    pub const VIOLATION: u8 = 3;
    pub const IO: u8 = 4;

    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn violation(message: impl Into<String>) -> Self {
        Failure {
            code: Self::VIOLATION,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: Self::IO,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn code_of(e: &radial_tree::Error) -> u8 {
    use radial_tree::Error as E;
    match e {
        E::Replicate { source, .. } => code_of(source),
        E::InvariantViolation(_) | E::DegenerateTrace(_) => Failure::VIOLATION,
        E::Io { .. } | E::Parse { .. } | E::Csv(_) | E::InvalidPointSet(_) | E::InvalidTree(_) => {
            Failure::IO
        }
        _ => Failure::USAGE,
    }
}

impl From<radial_tree::Error> for Failure {
    fn from(e: radial_tree::Error) -> Self {
        Failure {
            code: code_of(&e),
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
