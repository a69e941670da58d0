//! Batch orchestration for the refinement pipeline: subcommands composing
//! the library over directories, config handling, overlay rendering and
//! report emission.

mod commands;
mod config;
mod overlay;
mod pairing;

pub use commands::{cmd_eval, cmd_overlay, cmd_refine, cmd_search, cmd_superpix};
pub use config::{CliArgs, Command, PipelineConfig};

use clap::Parser;

/// Exit codes: 0 success, 1 completed with per-file failures, 2 config
/// error, 3 i/o error, 4 misaligned inputs.
#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Io(String),
    Misaligned(String),
}

impl CmdError {
    fn code(&self) -> u8 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Io(_) => 3,
            CmdError::Misaligned(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CmdError::Config(m) | CmdError::Io(m) | CmdError::Misaligned(m) => m,
        }
    }
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("REFIT_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
}

pub fn parse_args() -> CliArgs {
    CliArgs::parse()
}

/// Runs one subcommand and maps its outcome to the exit-code contract.
pub fn run(cli: CliArgs) -> u8 {
    let outcome = match config::build(&cli) {
        Ok((config, command)) => match command {
            Command::Superpix => cmd_superpix(&config),
            Command::Refine => cmd_refine(&config),
            Command::Eval { pred_dir, gt_dir } => cmd_eval(&config, &pred_dir, &gt_dir),
            Command::Search => cmd_search(&config),
            Command::Overlay { image, masks, out } => cmd_overlay(&config, &image, &masks, &out),
        },
        Err(e) => Err(e),
    };
    match outcome {
        Ok(0) => 0,
        Ok(failures) => {
            log::error!("{failures} input file(s) failed and were skipped");
            1
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
