//! `heatquad` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

mod args;
mod bench;
mod commands;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Config, DesignsCommand};
use commands::Ctx;

/// Marks an error chain as a numerical failure for the exit code.
#[derive(Debug)]
pub struct NumericalFailure;

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("numerical failure")
    }
}

impl std::error::Error for NumericalFailure {}

pub fn is_numerical(e: &anyhow::Error) -> bool {
    e.downcast_ref::<NumericalFailure>().is_some()
        || e.chain()
            .any(|c| c.downcast_ref::<heatquad::Error>().is_some_and(heatquad::Error::is_numerical))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = Config::load(cli.global.config.as_ref())?;
    let global = config.fill(&cli.global)?;
    let ctx = Ctx {
        seed: global.seed.unwrap_or(0),
        out: global.out.clone(),
        format: global.format.map(Into::into).unwrap_or_default(),
    };
    let mut known = vec![serde_json::to_value(&global)?];
    macro_rules! resolve {
        ($a:expr) => {{
            let filled = config.fill($a)?;
            known.push(serde_json::to_value(&filled)?);
            filled
        }};
    }
    let warn_unknown = |known: &[serde_json::Value]| {
        for k in config.unknown_keys(known) {
            log::warn!("config key {k:?} is not used by this command");
        }
    };
    match &cli.command {
        Command::Generate(a) => {
            let a = resolve!(a);
            warn_unknown(&known);
            commands::generate(&ctx, &a)
        }
        Command::Weights(a) => {
            let a = resolve!(a);
            warn_unknown(&known);
            commands::weights(&ctx, &a)
        }
        Command::Eval(a) => {
            let a = resolve!(a);
            warn_unknown(&known);
            commands::eval(&ctx, &a)
        }
        Command::Bench(a) => {
            let a = resolve!(a);
            warn_unknown(&known);
            bench::bench(&ctx, &a)
        }
        Command::Designs(DesignsCommand::Import(a)) => {
            let a = resolve!(a);
            warn_unknown(&known);
            commands::designs_import(&ctx, &a)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_numerical(&e) { 2 } else { 1 })
        }
    }
}
