//! Drive a search through external worker processes speaking the line
//! protocol. Uses the test fixture worker; pass another command to use a
//! real trainer, e.g. `cargo run --example external_worker -- python3 my_worker.py`.

use emnas::orchestrator::{format_report, read_log, EvaluatorSpec, Search, SearchConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/fake_worker.py");
        args = vec!["python3".into(), fixture.into(), "ok".into()];
    }
    let command = args.remove(0);

    let out = tempfile::tempdir().unwrap();
    let config = SearchConfig {
        generations: 3,
        pop_size: 4,
        workers: 2,
        evaluator: EvaluatorSpec::External { command, args, timeout_s: 600.0 },
        out_dir: out.path().to_path_buf(),
        ..Default::default()
    };
    let report = Search::create(config, vec![]).unwrap().run_to_end().unwrap();
    for e in read_log(out.path()).unwrap().evaluations {
        let teacher = e.transfer.map(|t| t.teacher).unwrap_or_else(|| "-".into());
        println!("{:<4} reward {:>8.2} teacher {teacher:<4} handle {:?}", e.id, e.reward, e.expert_handle);
    }
    print!("{}", format_report(&report, Some(3)));
}
