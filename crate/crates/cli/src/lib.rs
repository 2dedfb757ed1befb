//! Command-line front end for `blamescope`.
//!
//! Every subcommand reads its inputs from the flags in [`Opts`], builds a
//! canonical JSON [`Report`](blamescope::report::Report) and returns it as a
//! string; `gen` returns a case-log CSV instead. Failures are [`CliError`]s
//! carrying the process exit code:
//!
//! | code | kind   | examples                                              |
//! |------|--------|-------------------------------------------------------|
//! | 2    | config | bad or missing flags, unknown names, missing files    |
//! | 3    | data   | malformed CSV/JSON, bad rows, degenerate ratings      |
//! | 4    | model  | invalid SCM, impossible observation, bad action       |

mod commands;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::execute;
pub use error::{CliError, ErrorKind};

#[derive(Debug, Clone, Parser)]
#[command(name = "blamescope", version, about = "Causal blameworthiness for human-AI decision systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Load and validate model, case-log and ratings files.
    Validate,
    /// Probability of a named outcome.
    Prob,
    /// Counterfactual probability of an outcome given an observation.
    Counterfactual,
    /// Discounted blameworthiness of one action relative to another.
    Blame,
    /// HITL versus human-only blame and per-case attribution over a case log.
    Hitl,
    /// Agreement and F1 metrics and their blame conversions.
    Metrics,
    /// Generate a seeded synthetic case log.
    Gen,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Prob => "prob",
            Command::Counterfactual => "counterfactual",
            Command::Blame => "blame",
            Command::Hitl => "hitl",
            Command::Metrics => "metrics",
            Command::Gen => "gen",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiscountArg {
    Unit,
    #[value(name = "cost_ratio")]
    CostRatio,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    #[default]
    Calibrated,
    Overconfident,
    Uninformative,
}

/// Flags shared by all subcommands. Each subcommand reads the ones it needs.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Opts {
    /// SCM model file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub scm: Option<PathBuf>,
    /// Case log (CSV).
    #[arg(long, global = true, value_name = "PATH")]
    pub cases: Option<PathBuf>,
    /// Ratings file (CSV).
    #[arg(long, global = true, value_name = "PATH")]
    pub ratings: Option<PathBuf>,
    /// Outcome name from the model file.
    #[arg(long, global = true, value_name = "NAME")]
    pub outcome: Option<String>,
    /// Action name from the model file.
    #[arg(long, global = true, value_name = "NAME")]
    pub action: Option<String>,
    /// Alternative action the first one is compared with.
    #[arg(long, global = true, value_name = "NAME")]
    pub baseline: Option<String>,
    /// Lower flag threshold.
    #[arg(long, global = true, value_name = "F")]
    pub l: Option<f64>,
    /// Upper flag threshold.
    #[arg(long, global = true, value_name = "F")]
    pub u: Option<f64>,
    /// Cost model name from the model file.
    #[arg(long, global = true, value_name = "NAME")]
    pub cost: Option<String>,
    /// Discount factor.
    #[arg(long, global = true, value_enum)]
    pub discount: Option<DiscountArg>,
    /// Monte Carlo sample count; omit for exact enumeration.
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<u64>,
    /// Seed for every random draw.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Force exact enumeration (overrides --samples).
    #[arg(long, global = true)]
    pub exact: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Observation for `counterfactual`, e.g. `X=1,Y=0`.
    #[arg(long, global = true, value_name = "VAR=VAL,...")]
    pub observe: Option<String>,
    /// Interventions, e.g. `X=0`.
    #[arg(long = "do", global = true, value_name = "VAR=VAL,...")]
    pub intervene: Option<String>,

    /// Cost of a decision the AI makes alone (`hitl`).
    #[arg(long, global = true, value_name = "F", default_value_t = 1.0)]
    pub ai_cost: f64,
    /// Cost of a decision reviewed by the human (`hitl`).
    #[arg(long, global = true, value_name = "F", default_value_t = 1.0)]
    pub human_cost: f64,

    /// Number of ordinal categories (`metrics --ratings`); default is the largest rating seen.
    #[arg(long, global = true, value_name = "K")]
    pub k: Option<usize>,
    /// Positive class label (`metrics --cases`).
    #[arg(long, global = true, value_name = "LABEL", default_value = "1")]
    pub positive: String,
    /// Convert a given kappa to blame (`metrics`).
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// F1 of the HITL system (`metrics`, with --f1-human).
    #[arg(long, global = true, value_name = "F")]
    pub f1_hitl: Option<f64>,
    /// F1 of the human-only system (`metrics`, with --f1-hitl).
    #[arg(long, global = true, value_name = "F")]
    pub f1_human: Option<f64>,

    /// Number of cases (`gen`).
    #[arg(long, global = true, value_name = "N", default_value_t = 200)]
    pub n: usize,
    /// Probability that the AI is right (`gen`).
    #[arg(long, global = true, value_name = "F", default_value_t = 0.85)]
    pub ai_accuracy: f64,
    /// Probability that the human is right (`gen`).
    #[arg(long, global = true, value_name = "F", default_value_t = 0.9)]
    pub human_accuracy: f64,
    /// How AI confidence relates to AI correctness (`gen`).
    #[arg(long, global = true, value_enum, default_value_t = ProfileArg::Calibrated)]
    pub profile: ProfileArg,
}

/// Parses arguments, mapping clap failures to configuration errors. `Ok(Err)`
/// carries help or version text that should be printed with exit code 0.
pub fn parse<I, T>(args: I) -> Result<Result<Cli, String>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => Ok(Ok(cli)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Ok(Err(e.to_string())),
            _ => Err(CliError::config("InvalidArguments", e.to_string().trim_end().to_string())),
        },
    }
}

/// Parses and executes a full command line, returning the text to emit.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse(args)? {
        Ok(cli) => execute(&cli),
        Err(text) => Ok(text),
    }
}
