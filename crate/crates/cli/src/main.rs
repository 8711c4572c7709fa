mod args;
mod bench;
mod commands;
mod manifest;
mod spec;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(geotree_kernels::Error),
}

impl From<geotree_kernels::Error> for CliError {
    fn from(e: geotree_kernels::Error) -> Self {
        use geotree_kernels::Error::*;
        match e {
            IncompatibleSpec(_) | InvalidConfig(_) => CliError::Usage(e.to_string()),
            e => CliError::Data(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        log::warn!("could not configure the global thread pool: {e}");
    }
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a, cli.threads),
        Command::Kernel(a) => commands::kernel(a, cli.threads),
        Command::Test(a) => commands::test(a, cli.threads),
        Command::Classify(a) => commands::classify(a, cli.threads),
        Command::Bench(a) => bench::run(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
