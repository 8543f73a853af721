//! Interrupt a search, resume it, and compare with an uninterrupted run.

use emnas::orchestrator::{Search, SearchConfig, LOG_FILE};

fn main() {
    let config = |dir: &std::path::Path| SearchConfig {
        generations: 6,
        pop_size: 6,
        run_seed: 5,
        out_dir: dir.to_path_buf(),
        ..Default::default()
    };

    let straight = tempfile::tempdir().unwrap();
    Search::create(config(straight.path()), vec![]).unwrap().run_to_end().unwrap();

    let interrupted = tempfile::tempdir().unwrap();
    let mut search = Search::create(config(interrupted.path()), vec![]).unwrap();
    search.step().unwrap();
    search.step().unwrap();
    search.step().unwrap();
    println!("stopped after {} generations", search.completed_generations());
    drop(search);

    let mut resumed = Search::resume(interrupted.path(), None).unwrap();
    println!("resumed at generation {}", resumed.completed_generations());
    resumed.run_to_end().unwrap();

    let a = std::fs::read(straight.path().join(LOG_FILE)).unwrap();
    let b = std::fs::read(interrupted.path().join(LOG_FILE)).unwrap();
    println!("logs identical: {} ({} bytes)", a == b, a.len());

    let altered = SearchConfig { pop_size: 7, ..config(interrupted.path()) };
    if let Err(e) = Search::resume(interrupted.path(), Some(&altered)) {
        println!("altered config: {e}");
    }
}
