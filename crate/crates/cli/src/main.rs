//! `ggm`: command-line front-end for the generalized Gaussian experiments.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 numeric
//! failure, 5 corrupt bitstream or grid file.

mod args;
mod commands;
mod error;
mod io;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, CodecCommand, Command};
use error::{invalid, CliResult, EXIT_VALIDATION};

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("GGM_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| invalid(format!("GGM_THREADS must be a positive integer, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(invalid("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::MismatchGrid(a) => commands::mismatch_grid(a),
        Command::BoundCurve(a) => commands::bound_curve(a),
        Command::RdSim(a) => commands::rd_sim(a),
        Command::Lut(a) => commands::lut(a),
        Command::Codec(CodecCommand::Encode(a)) => commands::encode(a),
        Command::Codec(CodecCommand::Decode(a)) => commands::decode(a),
        Command::Fit(a) => commands::fit(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ggm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
