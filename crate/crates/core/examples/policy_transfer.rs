//! Champion selection, hyperparameter decay and the transfer context, then
//! the same search with and without transfer.

use std::collections::BTreeMap;

use emnas::arch_metrics::ArchStats;
use emnas::evaluation::EvaluationResult;
use emnas::orchestrator::{read_log, Search, SearchConfig};
use emnas::transfer::{
    decay_hyperparams, default_decay_factors, default_hyperparams, make_transfer_context,
    select_champion, HyperparamRecord,
};

fn result(id: &str, reward: f64) -> EvaluationResult {
    EvaluationResult {
        id: id.into(),
        reward,
        expert_handle: Some(format!("/experts/{id}")),
        metrics: BTreeMap::new(),
        wall_seconds: 0.0,
    }
}

fn main() {
    let results = [result("1_0", 482.0), result("1_1", 452.0), result("1_2", 482.0)];
    let stats = [
        ArchStats { params: 1_020_000, flops: 0 },
        ArchStats { params: 1_130_000, flops: 0 },
        ArchStats { params: 990_000, flops: 0 },
    ];
    let champion = select_champion(results.iter().zip(&stats)).unwrap();
    println!("champion: {champion}");

    let mut h = HyperparamRecord::new(default_hyperparams(), default_decay_factors());
    for _ in 0..3 {
        h = decay_hyperparams(&h).unwrap();
        println!("generation {}: {:?}", h.generation, h.values);
    }
    let champ = results.iter().find(|r| r.id == champion).unwrap();
    let ctx = make_transfer_context(champ, 12_000, &h).unwrap();
    println!("context: {}", serde_json::to_string(&ctx).unwrap());

    for otl in [false, true] {
        let out = tempfile::tempdir().unwrap();
        let config = SearchConfig {
            generations: 5,
            pop_size: 8,
            otl_enabled: otl,
            out_dir: out.path().to_path_buf(),
            ..Default::default()
        };
        Search::create(config, vec![]).unwrap().run_to_end().unwrap();
        let log = read_log(out.path()).unwrap();
        let best: Vec<String> = log.generations.iter().map(|g| format!("{:.1}", g.best_reward())).collect();
        let teachers: Vec<String> = log
            .generations
            .iter()
            .map(|g| g.transfer_teacher.clone().unwrap_or_else(|| "-".into()))
            .collect();
        println!("transfer {otl:>5}: best {best:?} teachers {teachers:?}");
    }
}
