//! The search loop: initialization, parallel evaluation, ranking, transfer
//! handoff and breeding, with an append-only run log and atomic checkpoints.
//!
//! A run directory holds `run_header.json`, `run.jsonl`, `checkpoint.json`,
//! `timings.jsonl` and, once finished, `report.json`. Wall-clock times only
//! go to `timings.jsonl`, so the other files are a pure function of the
//! config.

mod config;
mod dispatch;
mod export;
pub mod records;
mod report;
mod search;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{EvaluatorSpec, FailurePolicy, SearchConfig, PENALTY_REWARD};
pub use dispatch::dispatch_evaluations;
pub use export::{
    evolution_rows, export_evolution_csv, normalized_generation, read_evolution_csv,
    write_evolution_csv, EvolutionRow,
};
pub use records::{
    ArchiveEntry, Checkpoint, EvaluationRecord, GenerationRecord, IndividualSummary, LogRecord,
    RewardSummary, RunHeader, RunReport,
};
pub use report::{
    build_report, format_report, percentile, read_header, read_log, render_genome,
    summarize_rewards, RunLog,
};
pub use search::{
    archive_insert, build_evaluator, derive_seed, evaluation_seed, hypervolume_reference,
    individual_id, next_population, run, Search, CHECKPOINT_FILE, HEADER_FILE, LOG_FILE,
    REPORT_FILE, TIMINGS_FILE,
};

use crate::arch_metrics::MetricsError;
use crate::evaluation::EvalError;
use crate::moea::MoeaError;
use crate::transfer::TransferError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Corrupt { path: PathBuf, message: String },
    #[error("{} already contains a run; use resume", .0.display())]
    AlreadyExists(PathBuf),
    #[error("{} contains no run", .0.display())]
    NoRun(PathBuf),
    #[error("no generations found in {}", .0.display())]
    NoGenerations(PathBuf),
    #[error("config hash mismatch: run has {run}, given config hashes to {config}")]
    ConfigMismatch { run: String, config: String },
    #[error("evaluation of `{id}` failed: {source}")]
    Evaluation {
        id: String,
        #[source]
        source: EvalError,
    },
    #[error("no individual `{0}` in the run log")]
    UnknownIndividual(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Moea(#[from] MoeaError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl RunError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io { path: path.to_path_buf(), source }
    }
}
