//! `ceo`: command-line front end for the two-link binary CEO library.

mod commands;
mod config;
mod io;

use std::process::ExitCode;

use config::{parse_config, ParseFailure, OUT_DIR_ENV};

/// Bad flags, missing or out-of-range parameters.
const EXIT_VALIDATION: u8 = 2;
/// The library rejected the request or a run failed.
const EXIT_RUNTIME: u8 = 3;
/// Reading or writing an artifact failed.
const EXIT_IO: u8 = 4;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cfg = match parse_config(&argv, None, std::env::var(OUT_DIR_ENV).ok()) {
        Ok(cfg) => cfg,
        Err(ParseFailure::Usage(e)) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
        Err(ParseFailure::Invalid(e)) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    for note in &cfg.provenance {
        log::warn!("{note}");
    }
    match commands::dispatch(&cfg) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let io = e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some());
            ExitCode::from(if io { EXIT_IO } else { EXIT_RUNTIME })
        }
    }
}
