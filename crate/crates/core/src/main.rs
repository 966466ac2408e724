//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chemgrow::cli::{
    cmd_classify, cmd_convergence, cmd_simulate, cmd_sweep, parse_config_for, Purpose, SweepAxis,
};
use chemgrow::error::{Error, Result};

#[derive(Parser)]
#[command(name = "chemgrow", version, about = "Simulator and regime classifier for a chemotaxis-growth system with nonlocal and gradient damping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the system; writes series, final fields and a report
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate every boundedness condition for the configured parameters
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Classify (and optionally simulate) across a parameter grid
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Swept model parameter; repeat for a second axis
        #[arg(long = "key")]
        keys: Vec<String>,
        /// Comma-separated values, one --values per --key
        #[arg(long = "values")]
        values: Vec<String>,
        /// Also run a simulation at every grid point
        #[arg(long)]
        simulate: bool,
    },
    /// Manufactured-solution convergence orders (heat_cosine, helmholtz_cosine)
    Convergence {
        #[arg(long)]
        case: String,
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf, purpose: Purpose) -> Result<chemgrow::cli::RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_for(&text, purpose)
}

fn parse_axes(keys: &[String], values: &[String]) -> Result<Vec<SweepAxis>> {
    if keys.len() != values.len() {
        return Err(Error::Sweep(format!(
            "got {} --key flags but {} --values flags",
            keys.len(),
            values.len()
        )));
    }
    keys.iter()
        .zip(values)
        .map(|(key, list)| {
            let parsed: Result<Vec<f64>> = list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Sweep(format!("bad value \"{s}\" for key \"{key}\"")))
                })
                .collect();
            let values = parsed?;
            if values.is_empty() {
                return Err(Error::Sweep(format!("empty value list for key \"{key}\"")));
            }
            Ok(SweepAxis {
                key: key.clone(),
                values,
            })
        })
        .collect()
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load(&config, Purpose::Simulate)?;
            cmd_simulate(&cfg)
        }
        Command::Classify { config } => {
            let cfg = load(&config, Purpose::Classify)?;
            print!("{}", cmd_classify(&cfg)?);
            Ok(0)
        }
        Command::Sweep {
            config,
            keys,
            values,
            simulate,
        } => {
            let purpose = if simulate { Purpose::Simulate } else { Purpose::Classify };
            let cfg = load(&config, purpose)?;
            let axes = parse_axes(&keys, &values)?;
            let path = cmd_sweep(&cfg, &axes, simulate)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Convergence { case, config } => {
            let cfg = load(&config, Purpose::Convergence)?;
            print!("{}", cmd_convergence(&cfg, &case)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
