use serde::{Deserialize, Serialize};

/// Genetic-operator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionParams {
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    /// Each crossover draws its probability uniformly from this closed range.
    pub crossover_prob_range: (f64, f64),
    /// Fraction of the population carried over unchanged; `0` disables survival.
    pub survival_prob: f64,
    pub tournament_size: usize,
    /// Early-exit threshold on parameter count, in millions.
    pub beta_m: f64,
    pub eepi_max_attempts: usize,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            mutation_prob: 0.1,
            crossover_prob_range: (0.5, 0.9),
            survival_prob: 0.2,
            tournament_size: 2,
            beta_m: 5.0,
            eepi_max_attempts: 1000,
        }
    }
}

impl EvolutionParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.mutation_prob) {
            out.push("evolution.mutation_prob in [0, 1]".to_string());
        }
        let (lo, hi) = self.crossover_prob_range;
        if !(unit(lo) && unit(hi) && lo <= hi) {
            out.push("evolution.crossover_prob_range non-empty within [0, 1]".to_string());
        }
        if !unit(self.survival_prob) {
            out.push("evolution.survival_prob in [0, 1]".to_string());
        }
        if self.tournament_size < 1 {
            out.push("evolution.tournament_size ≥ 1".to_string());
        }
        if self.beta_m.is_nan() || self.beta_m <= 0.0 {
            out.push("evolution.beta_m > 0".to_string());
        }
        if self.eepi_max_attempts < 1 {
            out.push("evolution.eepi_max_attempts ≥ 1".to_string());
        }
        out
    }
}
