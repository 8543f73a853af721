//! Generation-to-generation policy transfer: champion selection, training
//! hyperparameter decay, and the context handed to the next generation.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch_metrics::ArchStats;
use crate::evaluation::{EvaluationResult, TransferContext};

pub const DEFAULT_EXPERT_PAIRS: usize = 12_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransferError {
    #[error("cannot select a champion from an empty generation")]
    EmptyGeneration,
    #[error("non-finite reward for `{0}`")]
    NonFiniteReward(String),
    #[error("hyperparameter `{key}` would become non-positive ({value})")]
    NonPositive { key: String, value: f64 },
}

pub fn default_hyperparams() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("entropy".to_string(), 0.01),
        ("lr".to_string(), 3e-4),
        ("ppo_clip".to_string(), 0.2),
    ])
}

pub fn default_decay_factors() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("entropy".to_string(), 0.95),
        ("lr".to_string(), 0.95),
        ("ppo_clip".to_string(), 0.98),
    ])
}

/// Training hyperparameters in effect for one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamRecord {
    pub generation: usize,
    /// Values at generation 0.
    pub initial: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    pub decay_factors: BTreeMap<String, f64>,
}

impl HyperparamRecord {
    pub fn new(values: BTreeMap<String, f64>, decay_factors: BTreeMap<String, f64>) -> Self {
        Self { generation: 0, initial: values.clone(), values, decay_factors }
    }
}

/// Advances one generation, scaling every value by its decay factor (missing
/// factors count as 1). Values are recomputed from the initial ones as
/// `initial * factor^g`, so `g` steps never accumulate rounding drift.
pub fn decay_hyperparams(h: &HyperparamRecord) -> Result<HyperparamRecord, TransferError> {
    let generation = h.generation + 1;
    let exponent = i32::try_from(generation).unwrap_or(i32::MAX);
    let mut values = BTreeMap::new();
    for (key, &v0) in &h.initial {
        let next = v0 * h.decay_factors.get(key).copied().unwrap_or(1.0).powi(exponent);
        if next.is_nan() || next <= 0.0 {
            return Err(TransferError::NonPositive { key: key.clone(), value: next });
        }
        values.insert(key.clone(), next);
    }
    Ok(HyperparamRecord {
        generation,
        initial: h.initial.clone(),
        values,
        decay_factors: h.decay_factors.clone(),
    })
}

/// Best-by-reward individual; ties go to fewer parameters, then to the
/// smaller id.
pub fn select_champion<'a>(
    generation: impl IntoIterator<Item = (&'a EvaluationResult, &'a ArchStats)>,
) -> Result<String, TransferError> {
    let mut best: Option<(&EvaluationResult, &ArchStats)> = None;
    for (result, stats) in generation {
        if !result.reward.is_finite() {
            return Err(TransferError::NonFiniteReward(result.id.clone()));
        }
        let better = match best {
            None => true,
            Some((b, bs)) => result
                .reward
                .total_cmp(&b.reward)
                .reverse()
                .then(stats.params.cmp(&bs.params))
                .then_with(|| result.id.cmp(&b.id))
                .is_lt(),
        };
        if better {
            best = Some((result, stats));
        }
    }
    best.map(|(r, _)| r.id.clone()).ok_or(TransferError::EmptyGeneration)
}

/// The context every request of the next generation carries, survivors
/// included. `None` (with a warning) when the champion saved no expert data.
pub fn make_transfer_context(
    champion: &EvaluationResult,
    expert_pairs: usize,
    hyperparams: &HyperparamRecord,
) -> Option<TransferContext> {
    match &champion.expert_handle {
        Some(handle) => Some(TransferContext {
            teacher: champion.id.clone(),
            expert_handle: handle.clone(),
            expert_pairs,
            hyperparams: hyperparams.values.clone(),
        }),
        None => {
            warn!(
                "champion `{}` saved no expert data; generation {} runs without transfer",
                champion.id, hyperparams.generation
            );
            None
        }
    }
}
