use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emnas::orchestrator::{
    build_report, export_evolution_csv, format_report, read_header, read_log, render_genome,
    EvaluatorSpec, RunError, Search, SearchConfig,
};

#[derive(Parser)]
#[command(name = "emnas", version, about = "Evolutionary multi-objective architecture search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start a search and run it to the end.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// analytic or noisy
        #[arg(long)]
        evaluator: Option<String>,
    },
    /// Continue an interrupted search.
    Resume {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print reward statistics and the Pareto front.
    Report {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        top: Option<usize>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write one CSV row per evaluation.
    ExportCsv {
        #[arg(long)]
        run: PathBuf,
        /// Defaults to `evolution.csv` inside the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an individual's genome and size.
    ShowGenome {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        id: String,
    },
    /// Check a config file and print it with defaults filled in.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(_)
            | RunError::NoRun(_)
            | RunError::NoGenerations(_)
            | RunError::UnknownIndividual(_)
            | RunError::AlreadyExists(_)
            | RunError::ConfigMismatch { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(path: &Path) -> Result<SearchConfig, Failure> {
    SearchConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { config, seed, workers, out_dir, evaluator } => {
            let mut cfg = load_config(&config)?;
            let mut overrides = Vec::new();
            if let Some(seed) = seed {
                cfg.run_seed = seed;
                overrides.push(format!("run_seed={seed}"));
            }
            if let Some(w) = workers {
                cfg.workers = w;
                overrides.push(format!("workers={w}"));
            }
            if let Some(dir) = out_dir {
                overrides.push(format!("out_dir={}", dir.display()));
                cfg.out_dir = dir;
            }
            if let Some(name) = evaluator {
                cfg.evaluator = EvaluatorSpec::from_name(&name)
                    .ok_or_else(|| Failure::Usage(format!("unknown evaluator `{name}`")))?;
                overrides.push(format!("evaluator={name}"));
            }
            let report = Search::create(cfg, overrides)?.run_to_end()?;
            print!("{}", format_report(&report, Some(10)));
        }
        Command::Resume { run, workers } => {
            let mut search = Search::resume(&run, None)?;
            if search.is_finished() {
                println!(
                    "run in {} already completed {} generations",
                    run.display(),
                    search.completed_generations()
                );
                return Ok(());
            }
            if let Some(w) = workers {
                let mut cfg = search.config().clone();
                cfg.workers = w;
                search = Search::resume(&run, Some(&cfg))?;
            }
            let report = search.run_to_end()?;
            print!("{}", format_report(&report, Some(10)));
        }
        Command::Report { run, top, json } => {
            let report = build_report(&run)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            } else {
                print!("{}", format_report(&report, top));
            }
        }
        Command::ExportCsv { run, out } => {
            let out = out.unwrap_or_else(|| run.join("evolution.csv"));
            let rows = export_evolution_csv(&run, &out)?;
            println!("wrote {rows} rows to {}", out.display());
        }
        Command::ShowGenome { run, id } => {
            let header = read_header(&run)?;
            let log = read_log(&run)?;
            let record = log
                .evaluations
                .iter()
                .find(|e| e.id == id)
                .ok_or(RunError::UnknownIndividual(id))?;
            print!("{}", render_genome(&record.genome, &header.config.fidelity)?);
            println!("reward   {}", record.reward);
        }
        Command::ValidateConfig { config } => {
            let cfg = load_config(&config)?;
            let violations = cfg.violations();
            if !violations.is_empty() {
                return Err(Failure::Usage(format!(
                    "{} violation(s):\n{}",
                    violations.len(),
                    violations.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
                )));
            }
            println!("{}", serde_json::to_string_pretty(&cfg).expect("json"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
