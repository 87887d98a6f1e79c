//! `gpk` — gait phase toolkit CLI.

mod commands;
mod util;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "gpk",
    version,
    about = "Gait phase estimation toolkit: synthetic gait data, estimator training and \
             evaluation, controller blending, and online incremental training over UDP"
)]
struct Cli {
    /// Key=value config file providing defaults; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic gait dataset CSV
    Generate(commands::generate::GenerateArgs),
    /// Train a phase estimator and save the model file
    Train(commands::train::TrainArgs),
    /// Cross-validate the three estimators on one dataset
    Eval(commands::eval::EvalArgs),
    /// Replay test walks through the switching strategies with a trained model
    Simulate(commands::simulate::SimulateArgs),
    /// Run the online training loop (single-process loopback or UDP roles)
    Online(commands::online::OnlineArgs),
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = util::splice_config_args(std::env::args().collect())?;
    let cli = Cli::parse_from(argv);
    match cli.command {
        Command::Generate(args) => commands::generate::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Online(args) => commands::online::run(args),
    }
}
