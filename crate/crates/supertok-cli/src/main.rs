mod ablate;
mod args;
mod commands;
mod util;

use std::process::ExitCode;

use clap::Parser;
use supertok_core::error::Error as CoreError;

use args::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SUPERTOK_LOG"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::run_train(args),
        Command::Encode(args) => commands::run_encode(args),
        Command::Decode(args) => commands::run_decode(args),
        Command::Merge(args) => commands::run_merge(args),
        Command::VocabStats(args) => commands::run_vocab_stats(args),
        Command::Eval(args) => commands::run_eval(args),
        Command::RetokInit(args) => commands::run_retok_init(args),
        Command::Glitch(args) => commands::run_glitch(args),
        Command::Ablate(args) => ablate::run_ablate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}

/// Config mistakes exit 2 (like flag parse errors); runtime failures exit 1.
fn exit_code_for(error: &anyhow::Error) -> u8 {
    for cause in error.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::InvalidConfig(_) => 2,
                _ => 1,
            };
        }
    }
    // anyhow-level errors come from flag/config-file validation
    if error.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some()) {
        1
    } else {
        2
    }
}
