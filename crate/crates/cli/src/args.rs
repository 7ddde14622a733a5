//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lpstat_core::SelectionRule;

#[derive(Debug, Parser)]
#[command(
    name = "lpstat",
    version,
    about = "Mid-distribution LP statistics on CSV data"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// CSV file with a header row; the bundled GAG urine data when omitted
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Score order m
    #[arg(long, global = true, default_value_t = 4, value_parser = positive)]
    pub order: usize,
    /// Number of points in probability grids
    #[arg(long, global = true, default_value_t = 101, value_parser = positive)]
    pub grid: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Coefficient selection rule
    #[arg(long, global = true, value_enum, default_value_t = SelectArg::Bic)]
    pub select: SelectArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectArg {
    Aic,
    Bic,
    None,
}

impl From<SelectArg> for SelectionRule {
    fn from(s: SelectArg) -> Self {
        match s {
            SelectArg::Aic => SelectionRule::Aic,
            SelectArg::Bic => SelectionRule::Bic,
            SelectArg::None => SelectionRule::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RefArg {
    Normal,
    Exponential,
    Uniform,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Quartiles, informative quantile grid, LP moments, tail index, normality check
    Describe {
        #[arg(long)]
        col: String,
        /// Number of LP moments
        #[arg(long, default_value_t = 5, value_parser = positive)]
        moments: usize,
    },
    /// Correlations, LP comoment matrix, LPINFOR and the copula density grid
    Depend {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 51, value_parser = positive)]
        copula_grid: usize,
    },
    /// Series regression of Y on the scores of X
    Regress {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Extra X values at which to report the fitted curve
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
    },
    /// Conditional quantile and mean curves of Y over the observed X values
    Cquantile {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.25,0.5,0.75,0.95")]
        p: Vec<f64>,
        /// Conditioning levels u for which the density slice is reported
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.25,0.5,0.75,0.95")]
        slices: Vec<f64>,
    },
    /// Comparison density against a parametric reference
    Fit {
        #[arg(long)]
        col: String,
        #[arg(long, value_enum, default_value_t = RefArg::Normal)]
        g: RefArg,
        /// Skew-G accept-reject draws (0 disables)
        #[arg(long, default_value_t = 1000)]
        draws: usize,
    },
    /// Two-sample report for a binary group column
    Twosample {
        #[arg(long)]
        y: String,
        #[arg(long)]
        group: String,
        /// Split the group column into `value > threshold` and the rest
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<f64>,
        /// Prior Pr[group 1] for the classification curve; the sample share when omitted
        #[arg(long)]
        prior: Option<f64>,
        /// Scale the Wilcoxon z statistic by sqrt(n - 1)
        #[arg(long)]
        small_n: bool,
    },
    /// Normal mean/variance update with the prior held as a pseudo-sample
    BayesUpdate {
        #[arg(long)]
        prior_n: f64,
        #[arg(long, allow_hyphen_values = true)]
        prior_mean: f64,
        #[arg(long, default_value_t = 0.0)]
        prior_var: f64,
        /// Summarize this column of the input as the data
        #[arg(long, conflicts_with_all = ["data_n", "data_mean", "data_var"])]
        col: Option<String>,
        #[arg(long, requires_all = ["data_mean", "data_var"])]
        data_n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        data_mean: Option<f64>,
        #[arg(long)]
        data_var: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Describe { .. } => "describe",
            Command::Depend { .. } => "depend",
            Command::Regress { .. } => "regress",
            Command::Cquantile { .. } => "cquantile",
            Command::Fit { .. } => "fit",
            Command::Twosample { .. } => "twosample",
            Command::BayesUpdate { .. } => "bayes-update",
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}
