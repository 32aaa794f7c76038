//! `ffmi`: command-line frontend. Exit status 0 on success, 1 on numerical
//! failure, 2 on usage errors.

// `!(x < y)` is used on purpose: it rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<ffmi_core::Error> for CliError {
    fn from(e: ffmi_core::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl CliError {
    fn report(&self) -> ExitCode {
        let (msg, code) = match self {
            CliError::Usage(m) => (m, 2),
            CliError::Numerical(m) => (m, 1),
            CliError::Io(m) => (m, 1),
        };
        eprintln!("ffmi: {msg}");
        ExitCode::from(code)
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let flags = cli.command.flags().resolve()?;
    let work = || commands::run(&cli.command, &flags);
    let outcome = match flags.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start {n} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    match &flags.output {
        Some(path) => std::fs::write(path, &outcome.text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("cannot write output: {e}")))?;
        }
    }
    outcome.deferred.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
