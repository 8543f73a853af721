use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{EvalError, EvaluationRequest, EvaluationResult, Evaluator};
use crate::arch_metrics::arch_stats;

/// Constants of the analytic surrogate reward
/// `base - alpha * |params_m - target| - gamma * flops_g + delta * distinct_ops`,
/// plus `transfer_bonus` when the request carries a transfer context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateParams {
    pub base: f64,
    pub alpha: f64,
    pub target_params_m: f64,
    pub gamma: f64,
    pub delta: f64,
    pub transfer_bonus: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            base: 500.0,
            alpha: 100.0,
            target_params_m: 0.9,
            gamma: 50.0,
            delta: 5.0,
            transfer_bonus: 20.0,
        }
    }
}

impl SurrogateParams {
    pub fn reward(&self, params_m: f64, flops_g: f64, distinct_ops: usize, transfer: bool) -> f64 {
        let mut r = self.base - self.alpha * (params_m - self.target_params_m).abs()
            - self.gamma * flops_g
            + self.delta * distinct_ops as f64;
        if transfer {
            r += self.transfer_bonus;
        }
        r
    }
}

/// Deterministic, seed-independent stand-in for a trained policy's reward.
#[derive(Debug, Clone, Default)]
pub struct AnalyticSurrogate {
    pub params: SurrogateParams,
}

impl AnalyticSurrogate {
    pub fn new(params: SurrogateParams) -> Self {
        Self { params }
    }
}

impl Evaluator for AnalyticSurrogate {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError> {
        let stats = arch_stats(&request.genome, &request.fidelity)
            .map_err(|e| EvalError::InvalidGenome(e.to_string()))?;
        let distinct = request.genome.distinct_ops();
        let reward = self.params.reward(
            stats.params_m(),
            stats.flops_g(),
            distinct,
            request.transfer.is_some(),
        );
        let metrics = BTreeMap::from([
            ("distinct_ops".to_string(), distinct as f64),
            ("flops_g".to_string(), stats.flops_g()),
            ("params_m".to_string(), stats.params_m()),
        ]);
        Ok(EvaluationResult {
            id: request.id.clone(),
            reward,
            expert_handle: Some(format!("surrogate://{}", request.id)),
            metrics,
            wall_seconds: 0.0,
        })
    }
}

/// Analytic reward plus Gaussian noise drawn from the request seed.
#[derive(Debug, Clone)]
pub struct NoisySurrogate {
    pub inner: AnalyticSurrogate,
    pub sigma: f64,
}

impl NoisySurrogate {
    pub fn new(params: SurrogateParams, sigma: f64) -> Self {
        Self { inner: AnalyticSurrogate::new(params), sigma }
    }
}

impl Evaluator for NoisySurrogate {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError> {
        let mut result = self.inner.evaluate(request)?;
        let normal = Normal::new(0.0, self.sigma)
            .map_err(|e| EvalError::InvalidGenome(format!("bad sigma {}: {e}", self.sigma)))?;
        let noise = normal.sample(&mut ChaCha8Rng::seed_from_u64(request.seed));
        result.reward += noise;
        result.metrics.insert("noise".to_string(), noise);
        Ok(result)
    }
}

/// Looks rewards up by canonical genome text.
///
/// File format: one entry per line, `"<canonical genome text>"<TAB><reward>`.
#[derive(Debug, Clone, Default)]
pub struct TableSurrogate {
    table: HashMap<String, f64>,
}

impl TableSurrogate {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self { table: entries.into_iter().collect() }
    }

    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut table = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |why: &str| EvalError::Table(format!("line {}: {why}", n + 1));
            let (key, value) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
            let key = key
                .strip_prefix('"')
                .and_then(|k| k.strip_suffix('"'))
                .ok_or_else(|| bad("genome text must be double-quoted"))?;
            let reward: f64 = value.trim().parse().map_err(|_| bad("reward is not a number"))?;
            if !reward.is_finite() {
                return Err(bad("reward is not finite"));
            }
            table.insert(key.to_string(), reward);
        }
        Ok(Self { table })
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = fs::read_to_string(path)
            .map_err(|e| EvalError::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_file_string(&self) -> String {
        let mut keys: Vec<_> = self.table.iter().collect();
        keys.sort_by(|a, b| a.0.cmp(b.0));
        keys.iter().map(|(k, v)| format!("\"{k}\"\t{v}\n")).collect()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Evaluator for TableSurrogate {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError> {
        let key = request.genome.encode_text();
        let reward = *self.table.get(&key).ok_or(EvalError::UnknownGenome(key))?;
        Ok(EvaluationResult {
            id: request.id.clone(),
            reward,
            expert_handle: None,
            metrics: BTreeMap::new(),
            wall_seconds: 0.0,
        })
    }
}
