//! `anthroscore`: score entity mentions in a corpus and analyse the scores.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::CommonArgs;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError { code: 1, message: format!("{}: {e}", path.display()) }
    }
}

impl From<anthroscore::Error> for CliError {
    fn from(e: anthroscore::Error) -> Self {
        CliError::config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "anthroscore", version, about = "Masked-language-model anthropomorphism scores for entity mentions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    Category,
    Year,
    Entity,
    Source,
    Lexicon,
    LmPaper,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract and mask mentions, score them, write scored.jsonl and summary.json.
    Score(CommonArgs),
    /// Group scores and write means with bootstrap confidence intervals.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "source")]
        group_by: GroupBy,
        /// Scored records (default: OUTPUT_DIR/scored.jsonl).
        #[arg(long)]
        scored: Option<PathBuf>,
        /// Use the exact permutation p-value for year trends (up to 10 years).
        #[arg(long)]
        permutation_p: bool,
    },
    /// Weighted log-odds of verbs between high- and low-scoring mentions.
    Verbs {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        scored: Option<PathBuf>,
        /// Multiplier applied to the prior counts.
        #[arg(long, default_value_t = 1.0)]
        prior_scale: f64,
    },
    /// Robustness checks: pronoun:<word>, pronouns, reporting_verbs, top_verbs:<k>.
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        ablation: String,
        #[arg(long, value_enum, default_value = "source")]
        group_by: GroupBy,
        #[arg(long)]
        scored: Option<PathBuf>,
        /// Verb list replacing the bundled reporting verbs.
        #[arg(long)]
        verbs: Option<PathBuf>,
    },
    /// Most frequent subject and object chunk heads (for building lexicons).
    FreqReport {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100)]
        top_k: usize,
    },
    /// Serve the stub backend over the fill-mask HTTP protocol.
    ServeStub {
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
        #[arg(long, default_value = anthroscore::backend::REFERENCE_MODEL)]
        model: String,
        #[arg(long, default_value = anthroscore::backend::REFERENCE_MASK_TOKEN)]
        mask_token: String,
        /// Stub behaviour as JSON; uniform when absent.
        #[arg(long)]
        stub_file: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Score(common) => commands::score::run(&config::RunConfig::load(&common)?),
        Command::Analyze { common, group_by, scored, permutation_p } => {
            commands::analyze::analyze(&config::RunConfig::load(&common)?, group_by, scored.as_deref(), permutation_p)
        }
        Command::Verbs { common, scored, prior_scale } => {
            commands::analyze::verbs(&config::RunConfig::load(&common)?, scored.as_deref(), prior_scale)
        }
        Command::Ablate { common, ablation, group_by, scored, verbs } => commands::ablate::run(
            &config::RunConfig::load(&common)?,
            &ablation,
            group_by,
            scored.as_deref(),
            verbs.as_deref(),
        ),
        Command::FreqReport { common, top_k } => {
            commands::freq::run(&config::RunConfig::load(&common)?, top_k)
        }
        Command::ServeStub { addr, model, mask_token, stub_file } => {
            commands::freq::serve_stub(&addr, &model, &mask_token, stub_file.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
