//! NSGA-II machinery and the genetic operators over cell-pair chromosomes.

mod eepi;
mod hypervolume;
mod objectives;
mod params;
mod selection;
mod sorting;
mod variation;

pub use eepi::eepi_init;
pub use hypervolume::hypervolume;
pub use objectives::{dominates, normalize_objectives, NormalizedObjectives, ObjectiveVector};
pub use params::EvolutionParams;
pub use selection::{compare_ranked, survive, survivor_count, tournament_select};
pub use sorting::{crowding_distance, non_dominated_sort, rank_population, sort_points, RankedIndividual};
pub use variation::{crossover, mutate};

use thiserror::Error;

use crate::arch_metrics::MetricsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoeaError {
    #[error("non-finite objective at index {index}")]
    NonFinite { index: usize },
    #[error("parents have different block counts ({left} vs {right})")]
    BlockMismatch { left: usize, right: usize },
    #[error(
        "no architecture with params_m <= {beta_m} found in {attempts} attempts \
         (smallest seen: {min_params_m_seen} M)"
    )]
    ThresholdUnsatisfiable { beta_m: f64, attempts: usize, min_params_m_seen: f64 },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
