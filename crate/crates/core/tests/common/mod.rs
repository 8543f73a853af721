//! Independent oracles and helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;

use emnas::evaluation::{EvalError, EvaluationRequest, EvaluationResult, Evaluator};
use emnas::{FidelityConfig, Genome, OperatorKind};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Fronts by repeatedly peeling the points no remaining point dominates.
pub fn peel_fronts(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let dom = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    };
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dom(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn op_params(op: OperatorKind, c: u64, t: u64) -> u64 {
    use OperatorKind::*;
    match op {
        SkipConnect | MaxPool3x3 | AvgPool3x3 => 0,
        SepConv3x3 => 2 * (9 * c + c * c + 2 * c),
        SepConv5x5 => 2 * (25 * c + c * c + 2 * c),
        DilConv3x3 => 9 * c + c * c + 2 * c,
        DilConv5x5 => 25 * c + c * c + 2 * c,
        InvConv3x3 => 2 * t * c * c + 9 * t * c + 4 * t * c + 2 * c,
        InvConv5x5 => 2 * t * c * c + 25 * t * c + 4 * t * c + 2 * c,
        Conv7x7 => 49 * c * c + 2 * c,
    }
}

fn op_macs(op: OperatorKind, c: u64, t: u64, in_area: u64, out_area: u64) -> u64 {
    use OperatorKind::*;
    match op {
        MaxPool3x3 | AvgPool3x3 => 0,
        SkipConnect => 0,
        SepConv3x3 => 2 * (9 * c + c * c) * out_area,
        SepConv5x5 => 2 * (25 * c + c * c) * out_area,
        DilConv3x3 => (9 * c + c * c) * out_area,
        DilConv5x5 => (25 * c + c * c) * out_area,
        InvConv3x3 => t * c * c * in_area + 9 * t * c * out_area + t * c * c * out_area,
        InvConv5x5 => t * c * c * in_area + 25 * t * c * out_area + t * c * c * out_area,
        Conv7x7 => 49 * c * c * out_area,
    }
}

/// Parameters of a single operator at `c` channels (stride 1).
pub fn closed_form_op_params(op: OperatorKind, c: u64, expansion: u64) -> u64 {
    op_params(op, c, expansion)
}

/// Parameter and FLOP counts derived without the engine's layer graph.
pub fn oracle_stats(genome: &Genome, f: &FidelityConfig) -> (u64, u64) {
    let ceil_half = |x: u64| x.div_ceil(2);
    let t = f.inv_expansion as u64;
    let (mut h, mut w) = (f.input_hw.0 as u64, f.input_hw.1 as u64);
    let c0 = f.init_channels as u64;
    let mut params = 9 * f.input_channels as u64 * c0 + 2 * c0;
    let mut macs = 9 * f.input_channels as u64 * c0 * h * w;

    let reductions: Vec<usize> =
        if f.cells < 3 { vec![] } else { vec![f.cells / 3, 2 * f.cells / 3] };
    // (channels, h, w) of the two previous outputs.
    let mut pp = (c0, h, w);
    let mut p = (c0, h, w);
    let mut width = c0;
    for i in 0..f.cells {
        let reduction = reductions.contains(&i);
        if reduction {
            width *= 2;
        }
        let (in_h, in_w) = (p.1, p.2);
        let in_area = in_h * in_w;
        for (ch, _, _) in [pp, p] {
            params += ch * width + 2 * width;
            macs += ch * width * in_area;
        }
        let (out_h, out_w) = if reduction { (ceil_half(in_h), ceil_half(in_w)) } else { (in_h, in_w) };
        let out_area = out_h * out_w;
        let cell = if reduction { &genome.reduction } else { &genome.normal };
        for block in &cell.blocks {
            for gene in block {
                let strided = reduction && gene.input < 2;
                let src_area = if gene.input < 2 { in_area } else { out_area };
                params += op_params(gene.op, width, t);
                macs += op_macs(gene.op, width, t, src_area, out_area);
                if gene.op == OperatorKind::SkipConnect && strided {
                    params += width * width + 2 * width;
                    macs += width * width * out_area;
                }
            }
        }
        pp = p;
        p = (width * f.blocks as u64, out_h, out_w);
        h = out_h;
        w = out_w;
    }
    let _ = (h, w);
    let d = f.head_output_dim as u64;
    params += p.0 * d + d;
    macs += p.0 * d;
    (params, 2 * macs)
}

/// Reward of the analytic surrogate at its default parameters.
pub fn default_surrogate_reward(params: u64, flops: u64, distinct: usize, transfer: bool) -> f64 {
    let (pm, fg) = (params as f64 / 1e6, flops as f64 / 1e9);
    let mut r = 500.0 - 100.0 * (pm - 0.9).abs() - 50.0 * fg + 5.0 * distinct as f64;
    if transfer {
        r += 20.0;
    }
    r
}

/// Returns scripted rewards by individual id.
pub struct ScriptedEvaluator {
    pub rewards: BTreeMap<String, f64>,
    pub fail: Vec<String>,
    pub calls: Mutex<Vec<String>>,
}

impl ScriptedEvaluator {
    pub fn new(rewards: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self { rewards: rewards.into_iter().collect(), fail: Vec::new(), calls: Mutex::new(Vec::new()) }
    }
}

impl Evaluator for ScriptedEvaluator {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError> {
        self.calls.lock().unwrap().push(request.id.clone());
        if self.fail.contains(&request.id) {
            return Err(EvalError::WorkerExited("scripted crash".into()));
        }
        let reward = *self
            .rewards
            .get(&request.id)
            .ok_or_else(|| EvalError::UnknownGenome(request.id.clone()))?;
        Ok(EvaluationResult {
            id: request.id.clone(),
            reward,
            expert_handle: Some(format!("scripted://{}", request.id)),
            metrics: BTreeMap::new(),
            wall_seconds: 0.0,
        })
    }
}
