//! `lpstat` command-line tool: CSV in, deterministic JSON or CSV out.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod output;

use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

use lpstat_core::twosample::{BayesNormalState, GroupSummary};
use lpstat_core::LpError;

use args::{Cli, Command, Format};
use dataset::{ingest_csv, Dataset, DatasetError};
use output::{to_json, CommandResult};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MODULE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Module(#[from] LpError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Module(_) => EXIT_MODULE,
            _ => EXIT_INPUT,
        }
    }
}

fn load(cli: &Cli, cols: &[&str], warnings: &mut Vec<String>) -> Result<Dataset, CliError> {
    let ds = ingest_csv(cli.global.input.as_deref(), cols)?;
    if ds.rows_dropped > 0 {
        warnings.push(format!(
            "{} of {} rows dropped for missing or non-numeric values in {}",
            ds.rows_dropped,
            ds.rows_read,
            cols.join(", ")
        ));
    }
    Ok(ds)
}

/// Runs one parsed command and renders it in the requested format.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    let mut warnings = Vec::new();
    let out =
        match &cli.command {
            Command::Describe { col, moments } => {
                let ds = load(cli, &[col], &mut warnings)?;
                commands::describe(g, ds.column(col), *moments)?
            }
            Command::Depend { x, y, copula_grid } => {
                let ds = load(cli, &[x, y], &mut warnings)?;
                commands::depend(g, ds.column(x), ds.column(y), *copula_grid)?
            }
            Command::Regress { x, y, at } => {
                let ds = load(cli, &[x, y], &mut warnings)?;
                commands::regress(g, ds.column(x), ds.column(y), at)?
            }
            Command::Cquantile { x, y, p, slices } => {
                let ds = load(cli, &[x, y], &mut warnings)?;
                commands::cquantile(g, ds.column(x), ds.column(y), p, slices)?
            }
            Command::Fit {
                col,
                g: reference,
                draws,
            } => {
                let ds = load(cli, &[col], &mut warnings)?;
                commands::fit(g, ds.column(col), *reference, *draws)?
            }
            Command::Twosample {
                y,
                group,
                threshold,
                prior,
                small_n,
            } => {
                let ds = load(cli, &[y, group], &mut warnings)?;
                let labels: Vec<f64> = match threshold {
                    Some(t) => ds
                        .column(group)
                        .iter()
                        .map(|&v| if v > *t { 1.0 } else { 0.0 })
                        .collect(),
                    None => ds.column(group).to_vec(),
                };
                commands::twosample(g, &labels, ds.column(y), *prior, *small_n)?
            }
            Command::BayesUpdate {
                prior_n,
                prior_mean,
                prior_var,
                col,
                data_n,
                data_mean,
                data_var,
            } => {
                let prior = BayesNormalState::new(*prior_n, *prior_mean, *prior_var)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                let data =
                    match (col, data_n, data_mean, data_var) {
                        (Some(c), _, _, _) => {
                            let ds = load(cli, &[c], &mut warnings)?;
                            GroupSummary::from_values(ds.column(c))?
                        }
                        (None, Some(n), Some(m), Some(v)) => GroupSummary::new(*n, *m, *v)
                            .map_err(|e| CliError::Input(e.to_string()))?,
                        _ => return Err(CliError::Input(
                            "bayes-update needs --col or all of --data-n, --data-mean, --data-var"
                                .into(),
                        )),
                    };
                commands::bayes_update(prior, data)?
            }
        };
    warnings.extend(out.warnings);
    Ok(match g.format {
        Format::Csv => out.table.to_csv(),
        Format::Json => {
            let mut args = serde_json::to_value(&cli.command).expect("arguments serialize");
            let args = args
                .as_object_mut()
                .and_then(|m| m.values_mut().next())
                .map(std::mem::take)
                .unwrap_or(Value::Null);
            let command = json!({
                "name": cli.command.name(),
                "args": args,
                "global": g,
                "input": g.input.as_ref().map_or(dataset::BUNDLED_NAME.to_string(), |p| p.display().to_string()),
                "seed": g.seed,
            });
            to_json(&CommandResult {
                schema_version: output::SCHEMA_VERSION,
                command,
                payload: out.payload,
                warnings,
            })
        }
    })
}

/// Writes rendered output to `path` or stdout.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
