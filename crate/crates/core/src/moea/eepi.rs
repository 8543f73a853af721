use rand::Rng;

use super::params::EvolutionParams;
use super::MoeaError;
use crate::arch_metrics::{arch_stats, FidelityConfig};
use crate::search_space::{Chromosome, Genesis, SearchSpace};

/// Early-exit population initialization.
///
/// Samples genomes and keeps those whose parameter count is at most
/// `params.beta_m` million. Each individual gets at most
/// `params.eepi_max_attempts` samples; running out is an error carrying the
/// smallest size seen.
pub fn eepi_init<R: Rng + ?Sized>(
    pop_size: usize,
    space: &SearchSpace,
    fidelity: &FidelityConfig,
    params: &EvolutionParams,
    rng: &mut R,
    mut id_for: impl FnMut(usize) -> String,
) -> Result<Vec<Chromosome>, MoeaError> {
    let mut population = Vec::with_capacity(pop_size);
    let mut smallest = f64::INFINITY;
    for index in 0..pop_size {
        let mut accepted = None;
        for _ in 0..params.eepi_max_attempts {
            let genome = space.random_genome(rng);
            let params_m = arch_stats(&genome, fidelity)?.params_m();
            smallest = smallest.min(params_m);
            if params_m <= params.beta_m {
                accepted = Some(genome);
                break;
            }
        }
        let genome = accepted.ok_or(MoeaError::ThresholdUnsatisfiable {
            beta_m: params.beta_m,
            attempts: params.eepi_max_attempts,
            min_params_m_seen: smallest,
        })?;
        population.push(Chromosome::new(id_for(index), genome).with_lineage(Genesis::Init, Vec::new()));
    }
    Ok(population)
}
