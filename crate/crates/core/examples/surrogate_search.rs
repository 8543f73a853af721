//! A complete search scored by the analytic surrogate.

use emnas::orchestrator::{format_report, Search, SearchConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let out = tempfile::tempdir().unwrap();
    let config = SearchConfig {
        generations: 10,
        pop_size: 10,
        run_seed: 2,
        out_dir: out.path().to_path_buf(),
        ..Default::default()
    };

    let mut search = Search::create(config, vec![]).unwrap();
    println!("{:>3} {:>10} {:>10} {:>12}  champion", "gen", "best", "archive", "hypervolume");
    while let Some(g) = search.step().unwrap() {
        println!(
            "{:>3} {:>10.3} {:>10} {:>12.2}  {}",
            g.generation,
            g.best_reward(),
            g.archive_size,
            g.hypervolume,
            g.champion
        );
    }
    let report = search.run_to_end().unwrap();
    print!("{}", format_report(&report, Some(5)));
}
