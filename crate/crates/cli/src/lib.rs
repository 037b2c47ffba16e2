//! Command-line driver: configuration, dispatch and artifact emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod units;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::CliError;
use output::{OutDir, CONFIG_FILE, META_FILE};

#[derive(Debug, Parser)]
#[command(name = "rzeno", version, about = "Zeno protection of a Rydberg spin qubit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults apply without one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the Zeeman, Raman, fine-structure and error matrices.
    Model,
    /// Optimize the coding pulse timings.
    Optimize,
    /// Check the coding conditions for a timing file.
    Verify {
        #[arg(long)]
        timings: PathBuf,
    },
    /// Run Zeno cycles and the interval sweep.
    Simulate {
        /// Coding timings to use instead of optimizing.
        #[arg(long)]
        timings: Option<PathBuf>,
    },
    /// Projection kinetics and the transfer efficiency.
    Project,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Model => "model",
            Command::Optimize => "optimize",
            Command::Verify { .. } => "verify",
            Command::Simulate { .. } => "simulate",
            Command::Project => "project",
        }
    }
}

/// Runs one command and returns the line to print on success.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let start = Instant::now();
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    let out = OutDir::create(&cfg.output.dir)?;
    out.json(CONFIG_FILE, &cfg)?;
    let result =
        match &cli.command {
            Command::Model => commands::model(&cfg, &out)
                .map(|d| format!("{} matrices of dimension {}", d.matrices.len(), d.dimension)),
            Command::Optimize => commands::optimize(&cfg, &out)
                .map(|r| format!("converged at restart {}: residual {:e}", r.restart.unwrap_or(0), r.coding.residual)),
            Command::Verify { timings } => commands::verify(&cfg, timings, &out)
                .map(|r| format!("{} pulses, residual {:e}", r.n_pulses, r.residual)),
            Command::Simulate { timings } => commands::simulate(&cfg, timings.as_deref(), &out).map(|s| {
                s.series
                    .iter()
                    .map(|x| match (&x.fit, &x.fit_refused) {
                        (Some(f), _) => format!("{} slope {:.4}", label(x.protected), f.slope),
                        (None, Some(_)) => format!("{} fit refused", label(x.protected)),
                        (None, None) => format!("{} without sweep", label(x.protected)),
                    })
                    .collect::<Vec<_>>()
                    .join(", ")
            }),
            Command::Project => {
                commands::project(&cfg, &out).map(|r| format!("rate ratio {}, eta {}", r.rate_ratio, r.eta))
            }
        };
    out.json(META_FILE, &output::Meta::new(cli.command.name(), cfg.seed, start.elapsed().as_secs_f64()))?;
    result
}

fn label(protected: bool) -> &'static str {
    if protected {
        "protected"
    } else {
        "unprotected"
    }
}
