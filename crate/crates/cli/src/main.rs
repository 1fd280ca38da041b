use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod schema;

#[derive(Parser, Debug)]
#[command(name = "roughcat", version, about = "Equilibrium investment and catastrophe insurance under rough volatility and Hawkes claims")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON config; missing fields take the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory for config.json, summary.json and CSV output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `sim.seed` and `calibration.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Dotted override such as `market.gamma=0.5`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the Hawkes model to an event catalog.
    Calibrate {
        /// Raw catalog (`time,magnitude,...`) or normalized catalog (`t_years`).
        catalog: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the path-dependent and vanilla equilibria.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Welfare loss over the configured sweep.
    Welfare {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo terminal wealth against the analytic mean.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Normalize a raw catalog to fractional years.
    Ingest {
        catalog: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Calibrate { catalog, common } => commands::calibrate(&catalog, &common),
        Command::Solve { common } => commands::solve(&common),
        Command::Welfare { common } => commands::welfare(&common),
        Command::Simulate { common } => commands::simulate(&common),
        Command::Ingest { catalog, common } => commands::ingest(&catalog, &common),
    };
    match result {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("roughcat: {e}");
            commands::exit_code(&e).into()
        }
    }
}
