use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Seek, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::records::{
    ArchiveEntry, Checkpoint, EvaluationRecord, FailureInfo, GenerationRecord, IndividualSummary,
    LogRecord, RunHeader, RunReport,
};
use super::report::build_report;
use super::{dispatch_evaluations, EvaluatorSpec, FailurePolicy, RunError, SearchConfig, PENALTY_REWARD};
use crate::arch_metrics::{arch_stats, ArchStats};
use crate::evaluation::{
    AnalyticSurrogate, EvalError, EvaluationRequest, EvaluationResult, Evaluator, Message,
    NoisySurrogate, TableSurrogate, WorkerCommand, WorkerPool,
};
use crate::moea::{
    crossover, dominates, eepi_init, hypervolume, mutate, normalize_objectives, rank_population,
    survive, tournament_select, ObjectiveVector, RankedIndividual,
};
use crate::search_space::{Chromosome, Genesis};
use crate::transfer::{decay_hyperparams, make_transfer_context, select_champion, HyperparamRecord};

pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_FILE: &str = "run_header.json";
pub const LOG_FILE: &str = "run.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TIMINGS_FILE: &str = "timings.jsonl";
pub const REPORT_FILE: &str = "report.json";

/// Deterministic 64-bit seed for a named stream and two indices.
pub fn derive_seed(run_seed: u64, stream: &str, a: u64, b: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(stream.as_bytes());
    h.update(run_seed.to_le_bytes());
    h.update(a.to_le_bytes());
    h.update(b.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Seed of the evaluation of individual `index` in `generation`.
pub fn evaluation_seed(run_seed: u64, generation: usize, index: usize) -> u64 {
    derive_seed(run_seed, "evaluation-seeds", generation as u64, index as u64)
}

fn evolution_rng(run_seed: u64) -> (u64, ChaCha8Rng) {
    let seed = derive_seed(run_seed, "init/evolution", 0, 0);
    (seed, ChaCha8Rng::seed_from_u64(seed))
}

pub fn individual_id(generation: usize, index: usize) -> String {
    format!("{generation}_{index}")
}

/// Hypervolume reference point in minimized space: zero reward, `beta_m`
/// million parameters, `2 * beta_m` GFLOPs.
pub fn hypervolume_reference(config: &SearchConfig) -> [f64; 3] {
    [0.0, config.evolution.beta_m, 2.0 * config.evolution.beta_m]
}

pub fn build_evaluator(config: &SearchConfig) -> Result<Box<dyn Evaluator>, RunError> {
    Ok(match &config.evaluator {
        EvaluatorSpec::Analytic => Box::new(AnalyticSurrogate::new(config.surrogate.clone())),
        EvaluatorSpec::Noisy { sigma } => {
            Box::new(NoisySurrogate::new(config.surrogate.clone(), *sigma))
        }
        EvaluatorSpec::Table { path } => Box::new(TableSurrogate::load(path)?),
        EvaluatorSpec::External { command, args, timeout_s } => Box::new(WorkerPool::new(
            WorkerCommand { command: command.clone(), args: args.clone() },
            Message::init(&config.fidelity, config.run_seed),
            config.workers,
            Duration::from_secs_f64(*timeout_s),
        )),
    })
}

fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let tmp = path.with_extension("json.tmp");
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    {
        let mut f = File::create(&tmp).map_err(|e| RunError::io(&tmp, e))?;
        f.write_all(text.as_bytes()).map_err(|e| RunError::io(&tmp, e))?;
        f.sync_all().map_err(|e| RunError::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| RunError::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| RunError::Corrupt { path: path.to_path_buf(), message: e.to_string() })
}

fn append(path: &Path, text: &str) -> Result<u64, RunError> {
    let mut f = OpenOptions::new().append(true).open(path).map_err(|e| RunError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| RunError::io(path, e))?;
    f.sync_data().map_err(|e| RunError::io(path, e))?;
    f.stream_position().map_err(|e| RunError::io(path, e))
}

#[derive(Serialize)]
struct Timing<'a> {
    generation: usize,
    wall_seconds: f64,
    evaluations: Vec<(&'a str, f64)>,
}

/// A search in progress, backed by its output directory.
pub struct Search {
    config: SearchConfig,
    dir: PathBuf,
    evaluator: Box<dyn Evaluator>,
    rng: ChaCha8Rng,
    state: Checkpoint,
}

impl Search {
    /// Starts a new run in `config.out_dir`: writes the header, samples the
    /// initial population and checkpoints it.
    pub fn create(config: SearchConfig, overrides: Vec<String>) -> Result<Self, RunError> {
        config.validate()?;
        let evaluator = build_evaluator(&config)?;
        let dir = config.out_dir.clone();
        if dir.join(HEADER_FILE).exists() {
            return Err(RunError::AlreadyExists(dir));
        }
        fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
        let hash = config.hash();
        let header = RunHeader {
            format_version: FORMAT_VERSION,
            config_hash: hash.clone(),
            config: config.clone(),
            hypervolume_reference: hypervolume_reference(&config),
            overrides,
        };
        for name in [LOG_FILE, TIMINGS_FILE] {
            let p = dir.join(name);
            File::create(&p).map_err(|e| RunError::io(&p, e))?;
        }

        let (rng_seed, mut rng) = evolution_rng(config.run_seed);
        let population = eepi_init(
            config.pop_size,
            &config.search_space(),
            &config.fidelity,
            &config.evolution,
            &mut rng,
            |i| individual_id(0, i),
        )?;
        write_json_atomic(&dir.join(HEADER_FILE), &header)?;
        let state = Checkpoint {
            format_version: FORMAT_VERSION,
            config_hash: hash,
            completed_generations: 0,
            population,
            rng_seed,
            rng_word_pos: rng.get_word_pos().to_string(),
            hyperparams: HyperparamRecord::new(
                config.initial_hyperparams.clone(),
                config.decay_factors.clone(),
            ),
            transfer: None,
            archive: Vec::new(),
            log_bytes: 0,
        };
        write_json_atomic(&dir.join(CHECKPOINT_FILE), &state)?;
        info!("created run in {} (config {})", dir.display(), &state.config_hash[..12]);
        Ok(Self { config, dir, evaluator, rng, state })
    }

    /// Reopens a run. When `expected` is given its hash must match the run's,
    /// and its `workers` setting is used.
    pub fn resume(dir: &Path, expected: Option<&SearchConfig>) -> Result<Self, RunError> {
        let header_path = dir.join(HEADER_FILE);
        if !header_path.exists() {
            return Err(RunError::NoRun(dir.to_path_buf()));
        }
        let header: RunHeader = read_json(&header_path)?;
        if header.format_version != FORMAT_VERSION {
            return Err(RunError::Corrupt {
                path: header_path,
                message: format!("format version {} (expected {FORMAT_VERSION})", header.format_version),
            });
        }
        let mut config = header.config.clone();
        if config.hash() != header.config_hash {
            return Err(RunError::ConfigMismatch { run: header.config_hash, config: config.hash() });
        }
        if let Some(expected) = expected {
            let found = expected.hash();
            if found != header.config_hash {
                return Err(RunError::ConfigMismatch { run: header.config_hash, config: found });
            }
            config.workers = expected.workers;
        }
        config.out_dir = dir.to_path_buf();

        let cp_path = dir.join(CHECKPOINT_FILE);
        let state: Checkpoint = read_json(&cp_path)?;
        if state.format_version != FORMAT_VERSION {
            return Err(RunError::Corrupt {
                path: cp_path,
                message: format!("format version {} (expected {FORMAT_VERSION})", state.format_version),
            });
        }
        if state.config_hash != header.config_hash {
            return Err(RunError::ConfigMismatch { run: header.config_hash, config: state.config_hash });
        }
        let word_pos: u128 = state.rng_word_pos.parse().map_err(|_| RunError::Corrupt {
            path: cp_path.clone(),
            message: format!("bad rng word position `{}`", state.rng_word_pos),
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(state.rng_seed);
        rng.set_word_pos(word_pos);

        let log_path = dir.join(LOG_FILE);
        let log = OpenOptions::new().write(true).open(&log_path).map_err(|e| RunError::io(&log_path, e))?;
        let len = log.metadata().map_err(|e| RunError::io(&log_path, e))?.len();
        if len < state.log_bytes {
            return Err(RunError::Corrupt {
                path: log_path,
                message: format!("log has {len} bytes, checkpoint expects {}", state.log_bytes),
            });
        }
        if len > state.log_bytes {
            warn!("discarding {} bytes of an unfinished generation", len - state.log_bytes);
            log.set_len(state.log_bytes).map_err(|e| RunError::io(&log_path, e))?;
        }
        let evaluator = build_evaluator(&config)?;
        Ok(Self { config, dir: dir.to_path_buf(), evaluator, rng, state })
    }

    /// Replaces the evaluator built from the config.
    pub fn with_evaluator(mut self, evaluator: Box<dyn Evaluator>) -> Self {
        self.evaluator = evaluator;
        self
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn completed_generations(&self) -> usize {
        self.state.completed_generations
    }

    pub fn is_finished(&self) -> bool {
        self.state.completed_generations >= self.config.generations
    }

    /// Population waiting to be evaluated in the next step.
    pub fn pending_population(&self) -> &[Chromosome] {
        &self.state.population
    }

    pub fn archive(&self) -> &[ArchiveEntry] {
        &self.state.archive
    }

    /// Requests the next step will dispatch.
    pub fn pending_requests(&self) -> Vec<EvaluationRequest> {
        let g = self.state.completed_generations;
        let transfer = if self.config.otl_enabled { self.state.transfer.clone() } else { None };
        self.state
            .population
            .iter()
            .enumerate()
            .map(|(i, c)| EvaluationRequest {
                id: c.id.clone(),
                genome: c.genome.clone(),
                fidelity: self.config.fidelity.clone(),
                transfer: transfer.clone(),
                seed: evaluation_seed(self.config.run_seed, g, i),
            })
            .collect()
    }

    fn evaluate_all(
        &self,
        requests: &[EvaluationRequest],
    ) -> Result<Vec<Result<EvaluationResult, EvalError>>, RunError> {
        let checked = |r: Result<EvaluationResult, EvalError>, req: &EvaluationRequest| {
            r.and_then(|res| {
                if !res.reward.is_finite() {
                    Err(EvalError::NonFiniteReward(req.id.clone()))
                } else if res.id != req.id {
                    Err(EvalError::ProtocolViolation(format!(
                        "result for `{}` answered request `{}`",
                        res.id, req.id
                    )))
                } else {
                    Ok(res)
                }
            })
        };
        let first = dispatch_evaluations(requests, &*self.evaluator, self.config.workers);
        let mut out = Vec::with_capacity(first.len());
        for (req, outcome) in requests.iter().zip(first) {
            let mut outcome = checked(outcome, req);
            if let Err(e) = &outcome {
                warn!("evaluation of `{}` failed ({}): {e}", req.id, e.category());
                match self.config.failure_policy {
                    FailurePolicy::Abort => {
                        return Err(RunError::Evaluation { id: req.id.clone(), source: e.clone() })
                    }
                    FailurePolicy::RetryOnce => {
                        outcome = checked(self.evaluator.evaluate(req), req);
                        if let Err(e) = &outcome {
                            warn!("retry of `{}` failed ({}): {e}", req.id, e.category());
                        }
                    }
                    FailurePolicy::Penalize => {}
                }
            }
            out.push(outcome);
        }
        Ok(out)
    }

    /// Evaluates, ranks and logs one generation, then breeds the next one and
    /// checkpoints. `None` once the run is finished.
    pub fn step(&mut self) -> Result<Option<GenerationRecord>, RunError> {
        if self.is_finished() {
            return Ok(None);
        }
        let started = Instant::now();
        let g = self.state.completed_generations;
        let requests = self.pending_requests();
        let outcomes = self.evaluate_all(&requests)?;
        let population = std::mem::take(&mut self.state.population);

        let stats: Vec<ArchStats> = population
            .iter()
            .map(|c| arch_stats(&c.genome, &self.config.fidelity))
            .collect::<Result<_, _>>()?;
        let mut results = Vec::with_capacity(population.len());
        let mut failures = Vec::with_capacity(population.len());
        for (req, outcome) in requests.iter().zip(outcomes) {
            match outcome {
                Ok(r) => {
                    results.push(r);
                    failures.push(None);
                }
                Err(e) => {
                    results.push(EvaluationResult {
                        id: req.id.clone(),
                        reward: PENALTY_REWARD,
                        expert_handle: None,
                        metrics: Default::default(),
                        wall_seconds: 0.0,
                    });
                    failures.push(Some(FailureInfo {
                        category: e.category().to_string(),
                        message: e.to_string(),
                    }));
                }
            }
        }

        let ids: Vec<String> = population.iter().map(|c| c.id.clone()).collect();
        let objectives: Vec<ObjectiveVector> = results
            .iter()
            .zip(&stats)
            .map(|(r, s)| ObjectiveVector::new(r.reward, s.params_m(), s.flops_g()))
            .collect();
        let ranked = rank_population(&ids, &objectives)?;
        let normalized = normalize_objectives(&objectives)?;
        let champion = select_champion(results.iter().zip(&stats))?;
        let survivors = survive(&ranked, self.config.pop_size, &self.config.evolution, Some(&champion));

        for (i, o) in objectives.iter().enumerate() {
            if failures[i].is_none() {
                archive_insert(&mut self.state.archive, ArchiveEntry {
                    id: ids[i].clone(),
                    generation: g,
                    reward: o.reward,
                    params_m: o.params_m,
                    flops_g: o.flops_g,
                });
            }
        }
        let points: Vec<[f64; 3]> = self.state.archive.iter().map(ArchiveEntry::minimized).collect();
        let hv = hypervolume(&points, hypervolume_reference(&self.config));

        let mut lines = String::new();
        for (i, c) in population.iter().enumerate() {
            let record = EvaluationRecord {
                generation: g,
                index: i,
                id: c.id.clone(),
                genome: c.genome.clone(),
                genome_text: c.genome.encode_text(),
                lineage: c.lineage.clone(),
                seed: requests[i].seed,
                transfer: requests[i].transfer.clone(),
                reward: results[i].reward,
                params: stats[i].params,
                flops: stats[i].flops,
                params_m: stats[i].params_m(),
                flops_g: stats[i].flops_g(),
                expert_handle: results[i].expert_handle.clone(),
                metrics: results[i].metrics.clone(),
                failure: failures[i].clone(),
            };
            lines.push_str(&serde_json::to_string(&LogRecord::Evaluation(record)).expect("json"));
            lines.push('\n');
        }
        let record = GenerationRecord {
            generation: g,
            individuals: population
                .iter()
                .zip(&ranked)
                .zip(&normalized)
                .map(|((c, r), n)| IndividualSummary {
                    id: c.id.clone(),
                    genome: c.genome.encode_text(),
                    reward: r.objectives.reward,
                    params_m: r.objectives.params_m,
                    flops_g: r.objectives.flops_g,
                    front: r.front,
                    crowding: r.crowding,
                    score: n.score,
                    lineage: c.lineage.clone(),
                })
                .collect(),
            champion: champion.clone(),
            survivors: survivors.clone(),
            hyperparams: self.state.hyperparams.values.clone(),
            transfer_teacher: requests.first().and_then(|r| r.transfer.as_ref()).map(|t| t.teacher.clone()),
            hypervolume: hv,
            archive_size: self.state.archive.len(),
        };
        lines.push_str(&serde_json::to_string(&LogRecord::Generation(record.clone())).expect("json"));
        lines.push('\n');

        if g + 1 < self.config.generations {
            self.state.hyperparams = decay_hyperparams(&self.state.hyperparams)?;
            self.state.transfer = if self.config.otl_enabled {
                let champ = results.iter().find(|r| r.id == champion).expect("champion evaluated");
                make_transfer_context(champ, self.config.expert_pairs, &self.state.hyperparams)
            } else {
                None
            };
            self.state.population = next_population(
                &self.config,
                g + 1,
                &population,
                &ranked,
                &survivors,
                &mut self.rng,
            )?;
        }

        let log_path = self.dir.join(LOG_FILE);
        let log_len = fs::metadata(&log_path).map_err(|e| RunError::io(&log_path, e))?.len();
        if log_len != self.state.log_bytes {
            let f = OpenOptions::new().write(true).open(&log_path).map_err(|e| RunError::io(&log_path, e))?;
            f.set_len(self.state.log_bytes).map_err(|e| RunError::io(&log_path, e))?;
        }
        self.state.log_bytes = append(&log_path, &lines)?;
        self.state.completed_generations = g + 1;
        self.state.rng_word_pos = self.rng.get_word_pos().to_string();
        write_json_atomic(&self.dir.join(CHECKPOINT_FILE), &self.state)?;

        let timing = Timing {
            generation: g,
            wall_seconds: started.elapsed().as_secs_f64(),
            evaluations: results.iter().map(|r| (r.id.as_str(), r.wall_seconds)).collect(),
        };
        let mut tline = serde_json::to_string(&timing).expect("json");
        tline.push('\n');
        let timings = self.dir.join(TIMINGS_FILE);
        if let Err(e) = append(&timings, &tline) {
            warn!("could not record timings: {e}");
        }
        info!(
            "generation {g}: best reward {:.3}, champion {champion}, hypervolume {hv:.4}",
            record.best_reward()
        );
        Ok(Some(record))
    }

    /// Runs the remaining generations and writes `report.json`.
    pub fn run_to_end(&mut self) -> Result<RunReport, RunError> {
        while self.step()?.is_some() {}
        let report = build_report(&self.dir)?;
        write_json_atomic(&self.dir.join(REPORT_FILE), &report)?;
        Ok(report)
    }
}

/// Starts a run and carries it to the end.
pub fn run(config: SearchConfig) -> Result<RunReport, RunError> {
    Search::create(config, Vec::new())?.run_to_end()
}

/// Adds `entry` unless an existing point dominates or equals it, dropping
/// points it dominates.
pub fn archive_insert(archive: &mut Vec<ArchiveEntry>, entry: ArchiveEntry) {
    let p = entry.minimized();
    if archive.iter().any(|a| {
        let q = a.minimized();
        q == p || dominates(&q, &p)
    }) {
        return;
    }
    archive.retain(|a| !dominates(&p, &a.minimized()));
    archive.push(entry);
}

/// Builds generation `generation` from the ranked previous one.
///
/// Evolution-stream draws happen in this order: the tournament rounds, then
/// for each parent pair its crossover followed by the mutation of the first
/// and of the second child. When the offspring count is odd the last second
/// child is still drawn, then dropped.
pub fn next_population(
    config: &SearchConfig,
    generation: usize,
    previous: &[Chromosome],
    ranked: &[RankedIndividual],
    survivors: &[String],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Chromosome>, RunError> {
    let by_id: HashMap<&str, &Chromosome> = previous.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut next = Vec::with_capacity(config.pop_size);
    for sid in survivors {
        let c = by_id[sid.as_str()];
        next.push(
            Chromosome::new(individual_id(generation, next.len()), c.genome.clone())
                .with_lineage(Genesis::Survivor, vec![sid.clone()]),
        );
    }
    let offspring = config.pop_size.saturating_sub(next.len());
    if offspring == 0 {
        return Ok(next);
    }
    let parents = tournament_select(ranked, offspring + offspring % 2, config.evolution.tournament_size, rng);
    for pair in parents.chunks(2) {
        let (p1, p2) = (by_id[pair[0].as_str()], by_id[pair[1].as_str()]);
        let i = next.len();
        let ids = (individual_id(generation, i), individual_id(generation, i + 1));
        let (c1, c2) = crossover(p1, p2, ids.clone(), rng, &config.evolution)?;
        let m1 = mutate(&c1, ids.0, &config.operators, rng, &config.evolution);
        let m2 = mutate(&c2, ids.1, &config.operators, rng, &config.evolution);
        next.push(m1);
        if next.len() < config.pop_size {
            next.push(m2);
        }
    }
    Ok(next)
}
