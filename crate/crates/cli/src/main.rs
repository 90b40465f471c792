//! `heatstab` — controller synthesis and closed-loop simulation for
//! heat-type diffusion on box domains with bounded-disturbance rejection.

// `!(x > 0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod manifest;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigFile, Overrides};
use error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "heatstab",
    version,
    about = "Spectral feedback design and closed-loop simulation for disturbed diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the controller design report for a configuration.
    Design {
        #[arg(long)]
        config: PathBuf,
        /// Also save design.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the closed loop and write trajectory.csv + manifest.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override both the disturbance seed and the initial-profile seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the horizon.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Run the Cartesian product of the sweep lists concurrently.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Write the full Gram matrix as CSV and report the spectral constant.
    Gram {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load_config(path: &PathBuf, ov: &Overrides) -> Result<ConfigFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ConfigFile::parse(&text)?;
    cfg.apply_overrides(ov);
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design { config, out } => {
            let cfg = load_config(&config, &Overrides::default())?;
            let resolved = cfg.resolve()?;
            let report = commands::cmd_design(&resolved, out.as_deref())?;
            println!("{report}");
        }
        Command::Simulate {
            config,
            out,
            seed,
            dt,
            t_end,
        } => {
            let cfg = load_config(&config, &Overrides { seed, dt, t_end })?;
            let resolved = cfg.resolve()?;
            let manifest = commands::cmd_simulate(&resolved, &out)?;
            let rate = manifest
                .decay
                .as_ref()
                .map(|d| format!("{:.6}", d.fitted_rate))
                .unwrap_or_else(|| "n/a".into());
            println!(
                "run complete: fitted rate {rate}, outputs in {}",
                out.display()
            );
        }
        Command::Sweep {
            config,
            out,
            seed,
            dt,
            t_end,
        } => {
            let cfg = load_config(&config, &Overrides { seed, dt, t_end })?;
            let message = commands::cmd_sweep(&cfg, &out)?;
            println!("{message}");
        }
        Command::Gram { config, out } => {
            let cfg = load_config(&config, &Overrides::default())?;
            let report = commands::cmd_gram(&cfg, &out)?;
            println!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
