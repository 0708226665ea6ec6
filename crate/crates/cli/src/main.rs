//! `glspace`: Grand Lebesgue space norms and operator checks from the shell.
//!
//! Exit status: 0 success or pass, 2 verification fail, 3 degenerate family,
//! 64 usage or parse error, 65 domain error, 74 output could not be written.

mod commands;
mod config;
mod spec;

use std::process::ExitCode;

use clap::Parser;
use glspace::Error;

use commands::{run, Command, Outcome};
use config::{Failure, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "glspace",
    version,
    about = "Grand Lebesgue space norms, fundamental functions and operator checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn init_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var("GLSPACE_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("GLSPACE_THREADS={text} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn report(failure: Failure) -> ExitCode {
    let (code, message) = match failure {
        Failure::Usage(m) => (64, m),
        Failure::Lib(e) => match e {
            Error::Parse {
                source_name,
                line: 0,
                message,
            } => (64, format!("{source_name}: {message}")),
            Error::Parse { .. } => (64, e.to_string()),
            Error::Domain(_) | Error::Precondition(_) => (65, e.to_string()),
            Error::Degenerate(_) => (3, e.to_string()),
            Error::Io(_) => (74, e.to_string()),
        },
    };
    eprintln!("glspace: {message}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, options) = cli.command.split();
    let outcome = init_threads()
        .and_then(|_| RunConfig::merge(options))
        .and_then(|cfg| run(name, &cfg));
    match outcome {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(f) => report(f),
    }
}
