//! Rank a population with NSGA-II, then pick parents and survivors.

use emnas::moea::{rank_population, survive, tournament_select, EvolutionParams, ObjectiveVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ids: Vec<String> = (0..10).map(|i| format!("0_{i}")).collect();
    let objectives: Vec<ObjectiveVector> = (0..10)
        .map(|_| {
            ObjectiveVector::new(
                rng.random_range(400.0..500.0),
                rng.random_range(0.2..2.0),
                rng.random_range(0.1..1.5),
            )
        })
        .collect();

    let ranked = rank_population(&ids, &objectives).unwrap();
    println!("{:<5} {:>8} {:>8} {:>8} {:>6} {:>9}", "id", "reward", "params", "gflops", "front", "crowding");
    for r in &ranked {
        let o = r.objectives;
        println!(
            "{:<5} {:>8.2} {:>8.3} {:>8.3} {:>6} {:>9.3}",
            r.id, o.reward, o.params_m, o.flops_g, r.front, r.crowding
        );
    }

    let params = EvolutionParams::default();
    let parents = tournament_select(&ranked, 8, params.tournament_size, &mut rng);
    println!("parents:   {parents:?}");
    println!("survivors: {:?}", survive(&ranked, 10, &params, None));
}
