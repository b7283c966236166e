mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

/// Planar microwave circuit design with clustered vertex actions.
#[derive(Parser)]
#[command(name = "mwdesign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for both clustering and training.
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted override such as `training.max_steps=500`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the seed mesh.
    Simulate(Common),
    /// Perturb every movable vertex and record the S-parameter changes.
    Dataset(Common),
    /// Fit action clusters.
    Cluster(Common),
    /// Train the design agent.
    Train {
        #[command(flatten)]
        common: Common,
        /// Act on raw vertices instead of clusters.
        #[arg(long)]
        baseline: bool,
        /// Continue from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Summarise a training run directory.
    Report {
        run_dir: PathBuf,
    },
}

fn load(c: &Common) -> Result<config::Loaded, CliError> {
    config::load(&c.config, &c.overrides, c.seed, c.out.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(c) => commands::simulate(&load(&c)?),
        Command::Dataset(c) => commands::dataset(&load(&c)?),
        Command::Cluster(c) => commands::cluster(&load(&c)?),
        Command::Train { common, baseline, resume } => commands::train_cmd(&load(&common)?, baseline, resume.as_deref()),
        Command::Report { run_dir } => {
            let summary = commands::report(&run_dir)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
