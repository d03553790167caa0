mod args;
mod commands;
mod support;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use support::{merge, read_config, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    let config = cli.config.as_deref().map(read_config).transpose()?;
    let config = config.as_ref();
    let ctx = Context {
        seed: cli.seed,
        jobs: cli.jobs.max(1),
    };
    match cli.command {
        Command::SpeedLimit(a) => commands::speed_limit(merge(&a, config)?, &ctx),
        Command::Plan(a) => commands::plan(merge(&a, config)?, &ctx),
        Command::Lift(a) => commands::lift(merge(&a, config)?, &ctx),
        Command::Simulate(a) => commands::simulate(merge(&a, config)?, &ctx),
        Command::SweepEps(a) => commands::sweep(merge(&a, config)?, &ctx),
        Command::Cost(a) => commands::cost(merge(&a, config)?, &ctx),
        Command::Stabilize(a) => commands::stabilize(merge(&a, config)?, &ctx),
        Command::Decompose(a) => commands::decompose(merge(&a, config)?, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bpctl {name}: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
