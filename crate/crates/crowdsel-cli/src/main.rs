//! `crowdsel`: corpus tooling and worker-selection simulations from the
//! command line. See `crowdsel --help` for the subcommand list.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

mod args;
mod commands;

fn main() -> ExitCode {
    reset_sigpipe();
    configure_rayon();
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders help to stdout and errors to stderr on its own.
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

/// Dies quietly when a downstream pipe closes (e.g. `crowdsel ... | head`),
/// like any other line-oriented tool, instead of panicking mid-print.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

/// Applies `CROWDSEL_THREADS` to the global rayon pool before first use.
fn configure_rayon() {
    let Ok(raw) = std::env::var("CROWDSEL_THREADS") else {
        return;
    };
    match raw.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(err) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("warning: could not size the thread pool: {err}");
            }
        }
        _ => eprintln!("warning: CROWDSEL_THREADS={raw} is not a positive integer; ignoring"),
    }
}
