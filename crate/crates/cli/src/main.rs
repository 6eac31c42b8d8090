//! `cope` — copula-entropy feature selection and regression from the shell.
//!
//! Exit codes are a stable contract: 0 success, 2 validation problem (bad
//! config, bad data, unknown column), 3 empty selection under a threshold
//! rule, 4 solver hit its iteration cap. Failures print exactly one JSON
//! line on stderr; progress goes to stdout.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    EmptySelection(String),
    Convergence(String),
}

impl From<cope_core::Error> for CliError {
    fn from(e: cope_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::EmptySelection(_) => "empty_selection",
            CliError::Convergence(_) => "convergence",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::EmptySelection(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::EmptySelection(m) | CliError::Convergence(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cope",
    version,
    about = "Rank features by copula-entropy association, select, train, and evaluate"
)]
struct Cli {
    /// Run configuration (TOML). Required by every subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override every seeded stage (split, model, synth) with one seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Cap worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate MI between the target and every candidate feature.
    Estimate,
    /// Estimate, then apply the configured selection rule.
    Select,
    /// Train one model on all rows with the configured features.
    Train,
    /// Score out_dir/model.json against the configured input.
    Evaluate,
    /// Full run: estimate, select, split, train selected + all, evaluate both.
    Pipeline,
    /// Write a synthetic CSV fixture from the [synth] section.
    Synth,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .ok_or_else(|| CliError::Validation("--config PATH is required".into()))?;
    let mut config = Config::load(&config_path)?;
    config.apply_overrides(cli.seed, cli.out);

    match cli.command {
        Command::Estimate => commands::cmd_estimate(&config).map(drop),
        Command::Select => commands::cmd_select(&config).map(drop),
        Command::Train => commands::cmd_train(&config),
        Command::Evaluate => commands::cmd_evaluate(&config).map(drop),
        Command::Pipeline => commands::cmd_pipeline(&config).map(drop),
        Command::Synth => commands::cmd_synth(&config).map(drop),
    }
}

fn main() -> ExitCode {
    // Rust ignores SIGPIPE, which turns `cope evaluate | head` into a panic
    // the moment the pipe closes. Restore the conventional die-quietly
    // behaviour expected of anything that prints CSV to stdout.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Ignore the error: the global pool can only be set once, which is
        // fine — first caller wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind(), "message": e.message() })
            );
            ExitCode::from(e.exit_code())
        }
    }
}
