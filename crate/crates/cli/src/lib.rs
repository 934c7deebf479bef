//! Experiment runner for the `skewclass` pipeline.
//!
//! A TOML config names a corpus, preprocessing and feature options, a grid of
//! hidden sizes and a list of balancing methods. Every `(hidden, method)`
//! pair is one cell: the corpus is split once, the cell balances the training
//! portion only, trains with early stopping and is scored on the untouched
//! test portion. Reports are written as TSV, aligned text and JSON.

use std::path::PathBuf;

pub mod config;
pub mod data;
pub mod experiment;
pub mod report;
pub mod runlog;

pub use config::{ExperimentConfig, KeywordSource, Method, NeighborSpace};
pub use data::{load_data, plan_folds, plan_split, PreparedData, SplitPlan};
pub use experiment::{run_cv, run_experiment, CellResult, CellSpec, RunRecord};
pub use report::{render_tables, SummaryRow, Tables};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] skewclass::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("leakage guard: {0}")]
    Leakage(String),

    #[error("{failed} of {total} cell(s) failed")]
    CellsFailed { failed: usize, total: usize },
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub(crate) fn write_file(path: &std::path::Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })?;
    text.push('\n');
    write_file(path, text)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}
