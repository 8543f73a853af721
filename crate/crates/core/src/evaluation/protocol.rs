//! Newline-delimited JSON messages exchanged with external workers.
//!
//! ```text
//! engine -> worker  {"type":"init","protocol_version":1,"fidelity":{...},"run_seed":N}
//! engine -> worker  {"type":"evaluate","id":"<gen>_<idx>","seed":N,"genome":{...},"transfer":{...}|null}
//! worker -> engine  {"type":"result","id":"...","reward":R,"expert_handle":"..."|null,"metrics":{...},"wall_seconds":S}
//! worker -> engine  {"type":"error","id":"...","message":"..."}
//! engine -> worker  {"type":"shutdown"}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EvaluationRequest, EvaluationResult, TransferContext};
use crate::arch_metrics::FidelityConfig;
use crate::search_space::Genome;

pub const PROTOCOL_VERSION: u32 = 1;

/// Fidelity as sent in the `init` message. `input` is `[height, width, channels]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFidelity {
    pub epochs: usize,
    pub input: [usize; 3],
    pub cells: usize,
    pub blocks: usize,
    pub init_channels: usize,
    pub head_output_dim: usize,
}

impl From<&FidelityConfig> for WireFidelity {
    fn from(f: &FidelityConfig) -> Self {
        Self {
            epochs: f.epochs,
            input: [f.input_hw.0, f.input_hw.1, f.input_channels],
            cells: f.cells,
            blocks: f.blocks,
            init_channels: f.init_channels,
            head_output_dim: f.head_output_dim,
        }
    }
}

impl From<&WireFidelity> for FidelityConfig {
    fn from(w: &WireFidelity) -> Self {
        FidelityConfig {
            input_hw: (w.input[0], w.input[1]),
            input_channels: w.input[2],
            cells: w.cells,
            blocks: w.blocks,
            init_channels: w.init_channels,
            epochs: w.epochs,
            head_output_dim: w.head_output_dim,
            ..FidelityConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Message {
    Init {
        protocol_version: u32,
        fidelity: WireFidelity,
        run_seed: u64,
    },
    Evaluate {
        id: String,
        seed: u64,
        genome: Genome,
        transfer: Option<TransferContext>,
    },
    Result {
        id: String,
        reward: f64,
        expert_handle: Option<String>,
        #[serde(default)]
        metrics: BTreeMap<String, f64>,
        #[serde(default)]
        wall_seconds: f64,
    },
    Error {
        id: String,
        message: String,
    },
    Shutdown,
}

impl Message {
    pub fn init(fidelity: &FidelityConfig, run_seed: u64) -> Self {
        Message::Init { protocol_version: PROTOCOL_VERSION, fidelity: fidelity.into(), run_seed }
    }

    pub fn evaluate(request: &EvaluationRequest) -> Self {
        Message::Evaluate {
            id: request.id.clone(),
            seed: request.seed,
            genome: request.genome.clone(),
            transfer: request.transfer.clone(),
        }
    }

    pub fn result(result: &EvaluationResult) -> Self {
        Message::Result {
            id: result.id.clone(),
            reward: result.reward,
            expert_handle: result.expert_handle.clone(),
            metrics: result.metrics.clone(),
            wall_seconds: result.wall_seconds,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Init { .. } => "init",
            Message::Evaluate { .. } => "evaluate",
            Message::Result { .. } => "result",
            Message::Error { .. } => "error",
            Message::Shutdown => "shutdown",
        }
    }

    /// One line of canonical JSON, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }

    pub fn parse(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}
