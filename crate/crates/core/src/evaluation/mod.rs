//! The evaluator contract and its implementations.
//!
//! An evaluator turns a genome at a given fidelity into a reward. Built-in
//! surrogates make the search runnable at desk scale; [`WorkerPool`] drives
//! external training processes over a newline-delimited JSON protocol.

mod protocol;
mod surrogate;
mod worker;

pub use protocol::{Message, WireFidelity, PROTOCOL_VERSION};
pub use surrogate::{AnalyticSurrogate, NoisySurrogate, SurrogateParams, TableSurrogate};
pub use worker::{WorkerCommand, WorkerPool, WorkerProcess};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch_metrics::FidelityConfig;
use crate::search_space::Genome;

/// Expert data and training hyperparameters handed from one generation's
/// champion to every individual of the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferContext {
    pub teacher: String,
    pub expert_handle: String,
    pub expert_pairs: usize,
    pub hyperparams: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRequest {
    pub id: String,
    pub genome: Genome,
    pub fidelity: FidelityConfig,
    pub transfer: Option<TransferContext>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub id: String,
    pub reward: f64,
    pub expert_handle: Option<String>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub wall_seconds: f64,
}

/// Failure categories of one evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("evaluation of `{id}` timed out after {seconds} s")]
    Timeout { id: String, seconds: f64 },
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("worker exited: {0}")]
    WorkerExited(String),
    #[error("worker reported error for `{id}`: {message}")]
    WorkerError { id: String, message: String },
    #[error("failed to spawn worker: {0}")]
    Spawn(String),
    #[error("unknown genome `{0}`")]
    UnknownGenome(String),
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
    #[error("non-finite reward for `{0}`")]
    NonFiniteReward(String),
    #[error("reward table: {0}")]
    Table(String),
}

impl EvalError {
    /// Stable category name used in run logs.
    pub fn category(&self) -> &'static str {
        match self {
            EvalError::Timeout { .. } => "timeout",
            EvalError::ProtocolViolation(_) => "protocol_violation",
            EvalError::WorkerExited(_) => "worker_exit",
            EvalError::WorkerError { .. } => "worker_error",
            EvalError::Spawn(_) => "spawn",
            EvalError::UnknownGenome(_) => "unknown_genome",
            EvalError::InvalidGenome(_) => "invalid_genome",
            EvalError::NonFiniteReward(_) => "non_finite_reward",
            EvalError::Table(_) => "table",
        }
    }
}

/// Anything that can score a genome.
///
/// Implementations are shared across dispatch threads, so `evaluate` takes
/// `&self`.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError>;
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError> {
        (**self).evaluate(request)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for std::sync::Arc<E> {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError> {
        (**self).evaluate(request)
    }
}
