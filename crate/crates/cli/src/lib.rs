//! Command-line front end for `nsm-core`.

pub mod commands;
pub mod config;

use clap::{Args, Parser, Subcommand};
use nsm_core::security::Regime;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Line 0 stands for a `--set` override.
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Core(#[from] nsm_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Core(nsm_core::Error::UndefinedConditional(_)) => 3,
            _ => 2,
        }
    }
}

/// Successful completion, possibly with an infeasible result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Infeasible,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Infeasible => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nsm", version, about = "Security parameters and protocol simulation in the noisy-storage model")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file with [source], [detector], [storage], [security]
    /// and [protocol] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override one setting, e.g. `--set detector.eta=0.5`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,

    #[arg(long, global = true)]
    pub regime: Option<Regime>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of every source and detector probability.
    Params,
    /// Feasibility grid over two parameters.
    Region {
        /// Outer axis as `name:lo:hi:steps`.
        #[arg(long)]
        x: String,
        /// Inner axis as `name:lo:hi:steps`.
        #[arg(long)]
        y: String,
        /// Use decoy states; needs `source.mu_hat`.
        #[arg(long)]
        decoy: bool,
    },
    /// Min-entropy rate, conditions and error for one configuration.
    Lambda {
        #[arg(long)]
        decoy: bool,
    },
    /// Oblivious transfer rate over a sweep of `M`, or one spot value.
    Otrate {
        #[arg(long, default_value_t = 1e6)]
        m_from: f64,
        #[arg(long, default_value_t = 1e12)]
        m_to: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
        /// Spot mode: evaluate the length formula at this min-entropy rate.
        #[arg(long, requires_all = ["beta", "m"])]
        lambda: Option<f64>,
        #[arg(long)]
        beta: Option<u64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        p_err: f64,
    },
    /// Decoy-state yield estimate, optionally from a simulated run.
    Decoy {
        /// Estimate from gains measured in a simulated decoy run.
        #[arg(long)]
        measured: bool,
    },
    /// Run protocol pipelines and summarise them.
    Simulate {
        /// Transcript of the first run.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::run(&cli) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
