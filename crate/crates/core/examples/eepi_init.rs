//! Early-exit initialization under several parameter budgets.

use emnas::arch_metrics::{arch_stats, FidelityConfig};
use emnas::moea::{eepi_init, EvolutionParams};
use emnas::search_space::SearchSpace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let fidelity = FidelityConfig { init_channels: 32, ..Default::default() };
    let space = SearchSpace::new(fidelity.blocks);

    for beta in [8.0, 5.0, 3.0, 0.05] {
        let params = EvolutionParams { beta_m: beta, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        match eepi_init(20, &space, &fidelity, &params, &mut rng, |i| format!("0_{i}")) {
            Ok(pop) => {
                let sizes: Vec<f64> = pop
                    .iter()
                    .map(|c| arch_stats(&c.genome, &fidelity).unwrap().params_m())
                    .collect();
                let max = sizes.iter().cloned().fold(0.0, f64::max);
                let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
                println!("beta {beta:>5}: mean {mean:.3} M, max {max:.3} M");
            }
            Err(e) => println!("beta {beta:>5}: {e}"),
        }
    }
}
