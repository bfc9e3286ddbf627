//! Named, reproducible verification runs over the `l2gauss` modules.
//!
//! Every acceptance check is one [`Check`] and produces exactly one
//! [`Record`]. Suites run sequentially in [`Suite::ALL`] order; the checks
//! themselves use the library's seeded parallel sampling, so a report
//! depends only on the configuration.

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

pub use checks::{Check, Outcome, CHECKS};
pub use config::{RunConfig, SampleSizes, Suite, DEFAULT_SEED, SEED_ENV};
pub use report::{Format, Record, Report, Value};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] l2gauss::Error),
}

/// Runs the selected suites in declared order. Check failures and model
/// errors become failing records; only an invalid configuration is an error.
pub fn run_suite(cfg: &RunConfig) -> Result<Report, VerifyError> {
    cfg.validate()?;
    let suites = cfg.selected()?;
    let mut report = Report::default();
    for &suite in &suites {
        if suite == Suite::Determinism {
            let rec = checks::determinism::record(cfg, &report);
            report.records.push(rec);
        } else {
            report.records.extend(run_checks(cfg, suite));
        }
    }
    Ok(report)
}

/// The records of one suite other than the determinism suite.
pub fn run_checks(cfg: &RunConfig, suite: Suite) -> Vec<Record> {
    CHECKS.iter().filter(|c| c.suite == suite).map(|c| c.execute(cfg)).collect()
}
