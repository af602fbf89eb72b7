//! Command-line front end: reads a flat configuration file, runs one
//! experiment and writes CSV files, a text summary and gnuplot scripts.
//!
//! ```text
//! robininv <command> --config <path> [--out <dir>] [--seed <u64>]
//! ```
//!
//! Exit codes: 0 success, 1 invalid parameters, 2 numerical or i/o failure,
//! 3 a run finished without reaching its target.

pub mod commands;
pub mod config;
pub mod output;
pub mod profile;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{execute, CliError, Command};
pub use config::{Config, ConfigError};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "ROBININV_THREADS";

#[derive(Debug, Parser)]
#[command(name = "robininv", version, about = "Robin transmission coefficient solvers")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Param(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    // a pool built earlier in the same process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("robininv: {e}");
        return e.exit_code();
    }
    let cfg = match Config::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("robininv: {e}");
            return 1;
        }
    };
    let cfg = match args.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    };
    let cfg = match args.out {
        Some(dir) => cfg.with_output_dir(dir),
        None => cfg,
    };
    let (summary, result) = execute(args.command, &cfg);
    print!("{}", summary.text());
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("robininv: {e}");
            e.exit_code()
        }
    }
}
