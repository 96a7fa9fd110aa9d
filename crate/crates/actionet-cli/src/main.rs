//! Command-line front end for the action assessment model.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data
//! error (malformed or missing data files, checkpoint mismatches),
//! 4 numeric error (undefined correlation, non-finite values).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{resolve, Overrides};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

/// One failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<actionet::Error> for CliError {
    fn from(e: actionet::Error) -> Self {
        use actionet::Error::*;
        let code = match &e {
            UndefinedCorrelation(_) | NonFinite(_) => EXIT_NUMERIC,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "actionet",
    version,
    about = "Action quality assessment: train, evaluate, and inspect attention-pooled two-stream models over precomputed video features"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct CommonFlags {
    /// Line-oriented `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Manifest CSV of videos, feature paths, and scores
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Directory for reports, checkpoints, and exports
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Master seed for all random streams
    #[arg(long)]
    seed: Option<u64>,
    /// Dataset preset: mit, rg-ball, rg-clubs, rg-hoop, rg-ribbon, synthetic, custom
    #[arg(long)]
    preset: Option<String>,
    /// Streams: ds, ss, or ts
    #[arg(long)]
    streams: Option<String>,
    /// Attention variant: caa, sau, or avg
    #[arg(long)]
    attention: Option<String>,
    /// Model checkpoint (ANPW file)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

impl CommonFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            config: self.config.clone(),
            manifest: self.manifest.clone(),
            out_dir: self.out_dir.clone(),
            checkpoint: self.checkpoint.clone(),
            seed: self.seed,
            preset: self.preset.clone(),
            streams: self.streams.clone(),
            attention: self.attention.clone(),
            split: None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write report.csv, model.anpw, and the resolved config
    Train {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Evaluate a checkpoint: Spearman rho on one split
    Eval {
        #[command(flatten)]
        common: CommonFlags,
        /// Split to evaluate: train or test
        #[arg(long)]
        split: Option<String>,
    },
    /// Export per-instance attention weights as CSV
    ExportAttention {
        #[command(flatten)]
        common: CommonFlags,
        /// Video ids to export (all manifest videos when omitted)
        video_ids: Vec<String>,
    },
    /// Generate a synthetic planted-signal dataset on disk
    Synth {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Print the parameter-count breakdown against the 3.54M reference claim
    Inspect {
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { common } => commands::cmd_train(resolve(&common.overrides())?),
        Command::Eval { common, split } => {
            let mut overrides = common.overrides();
            overrides.split = split;
            commands::cmd_eval(resolve(&overrides)?)
        }
        Command::ExportAttention { common, video_ids } => {
            commands::cmd_export_attention(resolve(&common.overrides())?, &video_ids)
        }
        Command::Synth { common } => commands::cmd_synth(resolve(&common.overrides())?),
        Command::Inspect { common } => commands::cmd_inspect(resolve(&common.overrides())?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
