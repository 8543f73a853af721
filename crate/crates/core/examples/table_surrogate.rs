//! Score genomes from a precomputed reward table, benchmark style.

use emnas::arch_metrics::FidelityConfig;
use emnas::evaluation::{AnalyticSurrogate, EvaluationRequest, Evaluator, TableSurrogate};
use emnas::orchestrator::{EvaluatorSpec, Search, SearchConfig};
use emnas::search_space::{OperatorKind, SearchSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let fidelity = FidelityConfig { cells: 2, blocks: 1, ..Default::default() };
    let ops = vec![OperatorKind::SkipConnect, OperatorKind::SepConv3x3];
    let space = SearchSpace::with_operators(1, ops.clone());
    println!("tabulating {} genomes", space.size());

    // Every genome of this tiny space, keyed by canonical text.
    let analytic = AnalyticSurrogate::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut entries = std::collections::BTreeMap::new();
    while entries.len() < space.size() as usize {
        let genome = space.random_genome(&mut rng);
        let req = EvaluationRequest {
            id: "t".into(),
            genome: genome.clone(),
            fidelity: fidelity.clone(),
            transfer: None,
            seed: 0,
        };
        let reward = analytic.evaluate(&req).unwrap().reward;
        entries.insert(genome.encode_text(), reward);
    }
    let table = TableSurrogate::from_entries(entries);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rewards.tsv");
    std::fs::write(&path, table.to_file_string()).unwrap();
    println!("{}", table.to_file_string().lines().next().unwrap());

    let config = SearchConfig {
        generations: 4,
        pop_size: 6,
        fidelity,
        operators: ops,
        evaluator: EvaluatorSpec::Table { path },
        out_dir: dir.path().join("run"),
        ..Default::default()
    };
    let report = Search::create(config, vec![]).unwrap().run_to_end().unwrap();
    let best = report.best_by_reward.unwrap();
    println!("best {} reward {} genome {}", best.id, best.reward, best.genome);
}
