use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SearchConfig;
use crate::evaluation::TransferContext;
use crate::search_space::{Chromosome, Genome, Lineage};
use crate::transfer::HyperparamRecord;

/// Crowding distances are infinite at front extremes; JSON has no infinity,
/// so they travel as the string `"inf"`.
pub mod crowding_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(de::Error::custom(format!("bad crowding distance `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureInfo {
    pub category: String,
    pub message: String,
}

/// One scored individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub generation: usize,
    pub index: usize,
    pub id: String,
    pub genome: Genome,
    pub genome_text: String,
    pub lineage: Option<Lineage>,
    pub seed: u64,
    pub transfer: Option<TransferContext>,
    pub reward: f64,
    pub params: u64,
    pub flops: u64,
    pub params_m: f64,
    pub flops_g: f64,
    pub expert_handle: Option<String>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualSummary {
    pub id: String,
    pub genome: String,
    pub reward: f64,
    pub params_m: f64,
    pub flops_g: f64,
    pub front: usize,
    #[serde(with = "crowding_serde")]
    pub crowding: f64,
    pub score: f64,
    pub lineage: Option<Lineage>,
}

/// Summary written after every generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub individuals: Vec<IndividualSummary>,
    pub champion: String,
    pub survivors: Vec<String>,
    pub hyperparams: BTreeMap<String, f64>,
    pub transfer_teacher: Option<String>,
    pub hypervolume: f64,
    pub archive_size: usize,
}

impl GenerationRecord {
    pub fn best_reward(&self) -> f64 {
        self.individuals.iter().map(|i| i.reward).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A line of `run.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum LogRecord {
    Evaluation(EvaluationRecord),
    Generation(GenerationRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub format_version: u32,
    pub config_hash: String,
    pub config: SearchConfig,
    /// Reference point of the hypervolume, in minimized objective space.
    pub hypervolume_reference: [f64; 3],
    /// Command-line overrides applied on top of the config file.
    #[serde(default)]
    pub overrides: Vec<String>,
}

/// Non-dominated objective vector seen so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub id: String,
    pub generation: usize,
    pub reward: f64,
    pub params_m: f64,
    pub flops_g: f64,
}

impl ArchiveEntry {
    pub fn minimized(&self) -> [f64; 3] {
        [-self.reward, self.params_m, self.flops_g]
    }
}

/// Everything needed to continue a run after the last completed generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config_hash: String,
    pub completed_generations: usize,
    /// Population awaiting evaluation; empty once the run is finished.
    pub population: Vec<Chromosome>,
    pub rng_seed: u64,
    /// ChaCha word position, as a decimal string.
    pub rng_word_pos: String,
    pub hyperparams: HyperparamRecord,
    pub transfer: Option<TransferContext>,
    pub archive: Vec<ArchiveEntry>,
    /// Bytes of `run.jsonl` that belong to completed generations.
    pub log_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSummary {
    pub count: usize,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub id: String,
    pub generation: usize,
    pub genome: String,
    pub reward: f64,
    pub params_m: f64,
    pub flops_g: f64,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub generations_completed: usize,
    pub evaluations: usize,
    pub failed_evaluations: usize,
    pub rewards: Option<RewardSummary>,
    pub pareto_front: Vec<FrontMember>,
    pub best_by_reward: Option<FrontMember>,
    pub best_by_score: Option<FrontMember>,
    pub hypervolume: Vec<f64>,
    pub generation_best_reward: Vec<f64>,
}
