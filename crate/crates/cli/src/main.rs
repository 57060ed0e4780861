//! `rolemodel`: synthesize, train, decode, analyze and recommend from the
//! command line. Every subcommand reads a TOML configuration (optional)
//! whose values are overridden by flags, and writes its artifacts to the
//! output directory.

mod analyze;
mod artifact;
mod config;
mod decode;
mod input;
mod recommend;
mod synth;
#[cfg(test)]
mod testutil;
mod train;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "rolemodel", version, about = "Behavioral state modeling and role-model recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Forward-sample a corpus and recommendation data from known profiles.
    Synth,
    /// Fit the state-transition topic model.
    Train,
    /// Viterbi-decode state paths under trained profiles.
    Decode,
    /// State summary, occupancy table and transition graphs.
    Analyze,
    /// Train relevance, filter under constraints, report MAP and OB.
    Recommend,
}

#[derive(Args)]
struct Flags {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    states: Option<usize>,
    #[arg(long, global = true)]
    topics: Option<usize>,
    #[arg(long, global = true)]
    sweeps: Option<usize>,
    #[arg(long = "burn-in", global = true)]
    burn_in: Option<usize>,
    /// Filter mode: MCCF_G, MCCF_C, MCCF_GC, GoalPart, HighCent, GoalPart_HighCent.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Relevance features: CAMF, CAMF_G, CAMF_C, CAMF_GC.
    #[arg(long, global = true)]
    features: Option<String>,
    /// Independent Gibbs chains; the best by mean post-burn-in log-probability is kept.
    #[arg(long, global = true)]
    chains: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

/// A failed run and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<rolemodel::Error> for Failure {
    fn from(e: rolemodel::Error) -> Self {
        let code = match e {
            rolemodel::Error::Infeasible { .. } => 3,
            rolemodel::Error::Internal(_) => 4,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn load_config(flags: Flags) -> Result<RunConfig, Failure> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(Overrides {
        seed: flags.seed,
        states: flags.states,
        topics: flags.topics,
        sweeps: flags.sweeps,
        burn_in: flags.burn_in,
        mode: flags.mode,
        features: flags.features,
        chains: flags.chains,
        out: flags.out,
    });
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(cli.flags)?;
    match cli.command {
        Command::Synth => synth::run(&cfg),
        Command::Train => train::run(&cfg),
        Command::Decode => decode::run(&cfg),
        Command::Analyze => analyze::run(&cfg),
        Command::Recommend => recommend::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
