use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunError;
use crate::arch_metrics::FidelityConfig;
use crate::evaluation::SurrogateParams;
use crate::moea::EvolutionParams;
use crate::search_space::{OperatorKind, SearchSpace};
use crate::transfer::{default_decay_factors, default_hyperparams, DEFAULT_EXPERT_PAIRS};

/// Which evaluator scores the population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EvaluatorSpec {
    Analytic,
    Noisy {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Table {
        path: PathBuf,
    },
    External {
        command: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_s: f64,
    },
}

fn default_sigma() -> f64 {
    25.0
}

fn default_timeout() -> f64 {
    3600.0
}

impl EvaluatorSpec {
    /// Short name accepted by the `--evaluator` flag.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "analytic" => Some(EvaluatorSpec::Analytic),
            "noisy" => Some(EvaluatorSpec::Noisy { sigma: default_sigma() }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EvaluatorSpec::Analytic => "analytic",
            EvaluatorSpec::Noisy { .. } => "noisy",
            EvaluatorSpec::Table { .. } => "table",
            EvaluatorSpec::External { .. } => "external",
        }
    }
}

/// What to do with an individual whose evaluation failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailurePolicy {
    /// Score it with the penalty reward.
    #[default]
    Penalize,
    /// Evaluate once more, then penalize.
    RetryOnce,
    /// Stop the run.
    Abort,
}

/// Reward assigned to failed evaluations.
pub const PENALTY_REWARD: f64 = -1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub generations: usize,
    pub pop_size: usize,
    pub evolution: EvolutionParams,
    pub fidelity: FidelityConfig,
    /// Operator vocabulary genes are drawn from.
    pub operators: Vec<OperatorKind>,
    pub evaluator: EvaluatorSpec,
    pub surrogate: SurrogateParams,
    pub workers: usize,
    pub otl_enabled: bool,
    pub initial_hyperparams: BTreeMap<String, f64>,
    pub decay_factors: BTreeMap<String, f64>,
    pub expert_pairs: usize,
    pub run_seed: u64,
    pub out_dir: PathBuf,
    pub failure_policy: FailurePolicy,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            generations: 10,
            pop_size: 10,
            evolution: EvolutionParams::default(),
            fidelity: FidelityConfig::default(),
            operators: OperatorKind::ALL.to_vec(),
            evaluator: EvaluatorSpec::Analytic,
            surrogate: SurrogateParams::default(),
            workers: 4,
            otl_enabled: true,
            initial_hyperparams: default_hyperparams(),
            decay_factors: default_decay_factors(),
            expert_pairs: DEFAULT_EXPERT_PAIRS,
            run_seed: 0,
            out_dir: PathBuf::from("runs/emnas"),
            failure_policy: FailurePolicy::Penalize,
        }
    }
}

impl SearchConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| RunError::Config(vec![format!("{}: {e}", path.display())]))
    }

    pub fn search_space(&self) -> SearchSpace {
        SearchSpace::with_operators(self.fidelity.blocks, self.operators.clone())
    }

    /// Every constraint violation, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.generations < 1 {
            out.push("generations ≥ 1".to_string());
        }
        if self.pop_size < 2 {
            out.push("pop_size ≥ 2".to_string());
        }
        if self.workers < 1 {
            out.push("workers ≥ 1".to_string());
        }
        out.extend(self.evolution.violations());
        if !self.evolution.beta_m.is_finite() {
            out.push("evolution.beta_m finite".to_string());
        }
        out.extend(self.fidelity.violations());
        if self.operators.is_empty() {
            out.push("operators non-empty".to_string());
        }
        let mut ops = self.operators.clone();
        ops.sort();
        ops.dedup();
        if ops.len() != self.operators.len() {
            out.push("operators distinct".to_string());
        }
        if self.expert_pairs < 1 {
            out.push("expert_pairs ≥ 1".to_string());
        }
        for (k, v) in &self.initial_hyperparams {
            if v.is_nan() || *v <= 0.0 {
                out.push(format!("initial_hyperparams.{k} > 0"));
            }
        }
        for (k, v) in &self.decay_factors {
            if v.is_nan() || *v <= 0.0 {
                out.push(format!("decay_factors.{k} > 0"));
            }
        }
        match &self.evaluator {
            EvaluatorSpec::Noisy { sigma } if sigma.is_nan() || *sigma < 0.0 => {
                out.push("evaluator.sigma ≥ 0".to_string())
            }
            EvaluatorSpec::External { command, timeout_s, .. } => {
                if command.is_empty() {
                    out.push("evaluator.command non-empty".to_string());
                }
                if timeout_s.is_nan() || *timeout_s <= 0.0 {
                    out.push("evaluator.timeout_s > 0".to_string());
                }
            }
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(RunError::Config(v))
        }
    }

    /// SHA-256 over the canonical JSON of every field that influences
    /// results. `out_dir` and `workers` are excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        canonical.workers = 1;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
