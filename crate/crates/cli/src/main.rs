use std::path::PathBuf;
use std::process::ExitCode;

use boasvr_cli::{embed_info, run, CliError, RunArgs};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boasvr", about = "Calibrate SVR forecasters with metaheuristic optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate one or more algorithms and write reports
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configured master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated list, e.g. boa,pso,ga
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<String>>,
    },
    /// Print the phase-space embedding selected for a price file
    EmbedInfo {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the version
    Version,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            input,
            out,
            seed,
            algorithms,
        } => {
            let summary = run(&RunArgs {
                config,
                input,
                out,
                seed,
                algorithms,
            })?;
            let labels: Vec<String> = summary.algorithms.iter().map(|a| a.model_label()).collect();
            println!("calibrated {} -> {}", labels.join(", "), summary.out.display());
        }
        Command::EmbedInfo { input, config } => {
            let info = embed_info(&input, config.as_deref())?;
            println!("observations: {}", info.observations);
            println!("dim: {}", info.dim);
            println!("delay: {}", info.delay);
            if let Some(local) = info.delay_at_local_minimum {
                println!("delay_at_local_minimum: {local}");
            }
            if let Some(converged) = info.dimension_converged {
                println!("dimension_converged: {converged}");
            }
        }
        Command::Version => println!("boasvr {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.code());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
