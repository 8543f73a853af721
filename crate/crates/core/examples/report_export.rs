//! Reward quartiles, the Pareto front, a genome listing and the CSV table.

use emnas::orchestrator::{
    build_report, export_evolution_csv, format_report, read_log, render_genome, summarize_rewards,
    Search, SearchConfig,
};

fn main() {
    let s = summarize_rewards(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    println!("[1, 2, 3, 4]: p25 {} median {} p75 {} max {}", s.p25, s.median, s.p75, s.max);

    let out = tempfile::tempdir().unwrap();
    let config = SearchConfig {
        generations: 6,
        pop_size: 6,
        out_dir: out.path().to_path_buf(),
        ..Default::default()
    };
    let fidelity = config.fidelity.clone();
    Search::create(config, vec![]).unwrap().run_to_end().unwrap();

    let report = build_report(out.path()).unwrap();
    print!("{}", format_report(&report, Some(5)));

    let best = report.best_by_reward.as_ref().unwrap();
    let log = read_log(out.path()).unwrap();
    let record = log.evaluations.iter().find(|e| e.id == best.id).unwrap();
    print!("{}", render_genome(&record.genome, &fidelity).unwrap());

    let csv = out.path().join("evolution.csv");
    let rows = export_evolution_csv(out.path(), &csv).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    println!("{rows} rows; first lines:");
    for line in text.lines().take(3) {
        println!("  {line}");
    }
}
