//! `toa`: scenario runner for the toa-core library.
//!
//! Exit codes: 0 success, 1 usage or validation, 2 resolution (aliasing,
//! grid leakage, under-resolved test function), 3 domain or contract errors,
//! 4 I/O. `TOA_THREADS` sets the worker count; absent or 0 means serial.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text; printed, exit 0.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] toa_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_resolution() => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn threads() -> Result<usize, CliError> {
    match std::env::var("TOA_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(|n| n.max(1))
            .map_err(|_| CliError::Usage(format!("TOA_THREADS must be a non-negative integer, got `{s}`"))),
    }
}

fn main_inner() -> Result<(), CliError> {
    let cli = config::parse_args(std::env::args())?;
    let scenario = config::resolve(&cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads()?)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))?;
    let started = Instant::now();
    let emission = pool.install(|| run::run(&scenario))?;
    if let Some(summary) = output::emit(&scenario, &emission)? {
        eprint!("{summary}");
    }
    eprintln!("toa {}: finished in {:.3} s", scenario.command.name(), started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Info(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("toa: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
