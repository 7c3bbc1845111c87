use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use panelcheck::consensus::DEFAULT_QUALIFICATION_THRESHOLD;
use panelcheck::latent::DEFAULT_MAX_ITER;
use panelcheck::resample::{DEFAULT_CONFIDENCE, DEFAULT_REPLICATES};

#[derive(Debug, Parser)]
#[command(
    name = "panelcheck",
    version,
    about = "Validate a binary classifier against an annotator panel"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Bootstrap replicates
    #[arg(long = "boot", global = true, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    /// Seed for every random draw; drawn at random and printed when absent
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Interval coverage
    #[arg(long, global = true, default_value_t = DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    /// Worker threads (defaults to one per core); results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report destination (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Label set of the input files
    #[arg(long, global = true, value_enum, default_value_t = SchemeChoice::Binary)]
    pub scheme: SchemeChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    /// Wellness / Other
    Binary,
    /// Wellness / NonWellness / Boarding / Grooming / Retail
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerMode {
    Wald,
    Bootstrap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Majority-vote reference labels
    Consensus {
        #[arg(long)]
        annotations: PathBuf,
        /// Also write the reference labels as CSV
        #[arg(long)]
        reference_out: Option<PathBuf>,
    },
    /// Exact match, Fleiss kappa and per-rater match rates
    Agreement {
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Apply the qualification gate to a match rate or to every rater of a panel
    Qualify {
        #[arg(long, conflicts_with = "annotations", required_unless_present = "annotations")]
        rate: Option<f64>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Reference to score raters against (panel majority when absent)
        #[arg(long, requires = "annotations")]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_QUALIFICATION_THRESHOLD)]
        threshold: f64,
    },
    /// Classifier metrics with bootstrap intervals
    Validate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Latent-class estimates of prevalence and rater accuracy
    Em {
        #[arg(long)]
        annotations: PathBuf,
        /// Add the classifier as one more rater
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Extra fits from random starting points
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        /// Fit even when the panel is too small for the model to be identifiable
        #[arg(long)]
        waive_identifiability: bool,
    },
    /// Brier score, C index and bias-corrected calibration
    Calibrate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Points on the calibration grid
        #[arg(long, default_value_t = panelcheck::calibration::DEFAULT_GRID_SIZE)]
        grid: usize,
        /// Write the curve as `predicted,apparent,bias_corrected`
        #[arg(long)]
        curve_out: Option<PathBuf>,
        /// Write an SVG plot of the curve
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Simulate a conditionally independent panel; writes annotations CSV to --out
    Simulate {
        #[arg(long)]
        prevalence: f64,
        /// Rater accuracy as `sensitivity:specificity`; repeat per rater
        #[arg(long = "rater", required = true, value_parser = parse_rater)]
        raters: Vec<(f64, f64)>,
        #[arg(long)]
        n: usize,
        /// Write the true class per visit
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write simulated classifier predictions with probabilities
        #[arg(long)]
        predictions_out: Option<PathBuf>,
    },
    /// Expected interval precision for a planned validation study
    Power {
        #[arg(long)]
        sensitivity: f64,
        #[arg(long)]
        specificity: f64,
        #[arg(long)]
        prevalence: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        sims: usize,
        /// Target interval half-width
        #[arg(long, default_value_t = 0.1)]
        target: f64,
        #[arg(long, value_enum, default_value_t = PowerMode::Wald)]
        mode: PowerMode,
    },
    /// Species, sex, life-stage and age summaries of the cohort
    Cohort {
        #[arg(long)]
        pets: PathBuf,
    },
}

fn parse_rater(raw: &str) -> Result<(f64, f64), String> {
    let (se, sp) = raw
        .split_once(':')
        .ok_or_else(|| format!("expected `sensitivity:specificity`, got `{raw}`"))?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    Ok((parse(se)?, parse(sp)?))
}

/// Flags whose values are output locations; they are left out of the
/// command echo so a report does not depend on where it was written.
pub const UNECHOED_FLAGS: [&str; 7] = [
    "--out",
    "--threads",
    "--reference-out",
    "--curve-out",
    "--svg",
    "--truth",
    "--predictions-out",
];
