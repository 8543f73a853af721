use serde::{Deserialize, Serialize};

use super::MoeaError;

/// The three search objectives of one evaluated individual.
///
/// Reward is maximized; parameters and FLOPs are minimized. All NSGA-II
/// machinery works on [`ObjectiveVector::minimized`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub reward: f64,
    pub params_m: f64,
    pub flops_g: f64,
}

impl ObjectiveVector {
    pub fn new(reward: f64, params_m: f64, flops_g: f64) -> Self {
        Self { reward, params_m, flops_g }
    }

    pub fn minimized(&self) -> [f64; 3] {
        [-self.reward, self.params_m, self.flops_g]
    }

    pub fn is_finite(&self) -> bool {
        self.reward.is_finite() && self.params_m.is_finite() && self.flops_g.is_finite()
    }
}

/// `a` dominates `b` under minimization: no worse anywhere, better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedObjectives {
    /// Min-max normalized minimized objectives, each in `[0, 1]`.
    pub values: [f64; 3],
    /// Mean of `values`; lower is better.
    pub score: f64,
}

/// Per-objective min-max normalization over one set of individuals.
///
/// Objectives with `max == min` map to `0.5`. The score is only used for
/// reporting and final tie-breaking, never for ranking.
pub fn normalize_objectives(
    objectives: &[ObjectiveVector],
) -> Result<Vec<NormalizedObjectives>, MoeaError> {
    if let Some(index) = objectives.iter().position(|o| !o.is_finite()) {
        return Err(MoeaError::NonFinite { index });
    }
    let points: Vec<[f64; 3]> = objectives.iter().map(ObjectiveVector::minimized).collect();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &points {
        for m in 0..3 {
            lo[m] = lo[m].min(p[m]);
            hi[m] = hi[m].max(p[m]);
        }
    }
    Ok(points
        .iter()
        .map(|p| {
            let mut values = [0.5; 3];
            for m in 0..3 {
                if hi[m] > lo[m] {
                    values[m] = (p[m] - lo[m]) / (hi[m] - lo[m]);
                }
            }
            let score = (values[0] + values[1] + values[2]) / 3.0;
            NormalizedObjectives { values, score }
        })
        .collect())
}
