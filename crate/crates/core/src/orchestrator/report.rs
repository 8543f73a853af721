use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::records::{EvaluationRecord, FrontMember, GenerationRecord, LogRecord, RewardSummary, RunHeader, RunReport};
use super::search::{read_json, HEADER_FILE, LOG_FILE};
use super::RunError;
use crate::arch_metrics::{arch_stats, FidelityConfig};
use crate::moea::{normalize_objectives, sort_points, ObjectiveVector};
use crate::search_space::{CellKind, Genome};

/// Parsed contents of a run directory's log.
#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub evaluations: Vec<EvaluationRecord>,
    pub generations: Vec<GenerationRecord>,
}

pub fn read_header(dir: &Path) -> Result<RunHeader, RunError> {
    let path = dir.join(HEADER_FILE);
    if !path.exists() {
        return Err(RunError::NoRun(dir.to_path_buf()));
    }
    read_json(&path)
}

/// Reads every complete line of `run.jsonl`. A torn final line (from a crash
/// mid-append) is ignored.
pub fn read_log(dir: &Path) -> Result<RunLog, RunError> {
    let path = dir.join(LOG_FILE);
    let text = fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
    let mut log = RunLog::default();
    for (n, line) in text.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        let rec: LogRecord = serde_json::from_str(line).map_err(|e| RunError::Corrupt {
            path: path.clone(),
            message: format!("line {}: {e}", n + 1),
        })?;
        match rec {
            LogRecord::Evaluation(e) => log.evaluations.push(e),
            LogRecord::Generation(g) => log.generations.push(g),
        }
    }
    Ok(log)
}

/// Percentile by linear interpolation between order statistics of an
/// ascending slice; `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty set");
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 25th percentile, median, 75th percentile and maximum.
pub fn summarize_rewards(rewards: &[f64]) -> Option<RewardSummary> {
    if rewards.is_empty() {
        return None;
    }
    let mut sorted = rewards.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(RewardSummary {
        count: sorted.len(),
        p25: percentile(&sorted, 0.25),
        median: percentile(&sorted, 0.5),
        p75: percentile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

fn member(e: &EvaluationRecord) -> FrontMember {
    FrontMember {
        id: e.id.clone(),
        generation: e.generation,
        genome: e.genome_text.clone(),
        reward: e.reward,
        params_m: e.params_m,
        flops_g: e.flops_g,
    }
}

/// Recomputes the final report from the raw log. Failed evaluations are left
/// out of every statistic.
pub fn build_report(dir: &Path) -> Result<RunReport, RunError> {
    let header = match read_header(dir) {
        Err(RunError::NoRun(d)) => return Err(RunError::NoGenerations(d)),
        other => other?,
    };
    let log = read_log(dir)?;
    if log.generations.is_empty() {
        return Err(RunError::NoGenerations(dir.to_path_buf()));
    }
    let ok: Vec<&EvaluationRecord> = log.evaluations.iter().filter(|e| e.failure.is_none()).collect();
    let rewards: Vec<f64> = ok.iter().map(|e| e.reward).collect();
    let objectives: Vec<ObjectiveVector> =
        ok.iter().map(|e| ObjectiveVector::new(e.reward, e.params_m, e.flops_g)).collect();

    let points: Vec<[f64; 3]> = objectives.iter().map(ObjectiveVector::minimized).collect();
    let pareto_front = sort_points(&points)
        .first()
        .map(|f| f.iter().map(|&i| member(ok[i])).collect())
        .unwrap_or_default();
    let best_by_reward = ok
        .iter()
        .min_by(|a, b| {
            b.reward.total_cmp(&a.reward).then(a.params.cmp(&b.params)).then_with(|| a.id.cmp(&b.id))
        })
        .map(|e| member(e));
    let best_by_score = if ok.is_empty() {
        None
    } else {
        let norm = normalize_objectives(&objectives)?;
        (0..ok.len())
            .min_by(|&a, &b| norm[a].score.total_cmp(&norm[b].score).then(a.cmp(&b)))
            .map(|i| member(ok[i]))
    };
    Ok(RunReport {
        config_hash: header.config_hash,
        generations_completed: log.generations.len(),
        evaluations: log.evaluations.len(),
        failed_evaluations: log.evaluations.len() - ok.len(),
        rewards: summarize_rewards(&rewards),
        pareto_front,
        best_by_reward,
        best_by_score,
        hypervolume: log.generations.iter().map(|g| g.hypervolume).collect(),
        generation_best_reward: log.generations.iter().map(GenerationRecord::best_reward).collect(),
    })
}

/// Human-readable summary; at most `top` front members are listed.
pub fn format_report(report: &RunReport, top: Option<usize>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "config        {}", report.config_hash);
    let _ = writeln!(out, "generations   {}", report.generations_completed);
    let _ = writeln!(
        out,
        "evaluations   {} ({} failed)",
        report.evaluations, report.failed_evaluations
    );
    if let Some(r) = &report.rewards {
        let _ = writeln!(out, "reward p25    {}", r.p25);
        let _ = writeln!(out, "reward median {}", r.median);
        let _ = writeln!(out, "reward p75    {}", r.p75);
        let _ = writeln!(out, "reward max    {}", r.max);
    }
    for (label, m) in [("best reward", &report.best_by_reward), ("best score", &report.best_by_score)] {
        if let Some(m) = m {
            let _ = writeln!(out, "{label:<13} {} ({:.3}, {:.6} M, {:.6} G)", m.id, m.reward, m.params_m, m.flops_g);
        }
    }
    let shown = top.unwrap_or(usize::MAX).min(report.pareto_front.len());
    let _ = writeln!(out, "pareto front  {} members", report.pareto_front.len());
    let _ = writeln!(out, "  {:<10} {:>12} {:>12} {:>12}", "id", "reward", "params_m", "flops_g");
    for m in &report.pareto_front[..shown] {
        let _ = writeln!(out, "  {:<10} {:>12.3} {:>12.6} {:>12.6}", m.id, m.reward, m.params_m, m.flops_g);
    }
    out
}

/// Canonical text, a per-cell block table and the genome's size.
pub fn render_genome(genome: &Genome, fidelity: &FidelityConfig) -> Result<String, RunError> {
    let stats = arch_stats(genome, fidelity)?;
    let mut out = String::new();
    let _ = writeln!(out, "{}", genome.encode_text());
    for kind in [CellKind::Normal, CellKind::Reduction] {
        let _ = writeln!(out, "{kind} cell");
        let _ = writeln!(out, "  {:<5} {:<14} {:<5} {:<14} {:<5}", "block", "op a", "in a", "op b", "in b");
        for (k, [a, b]) in genome.cell(kind).blocks.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {:<5} {:<14} {:<5} {:<14} {:<5}",
                k,
                a.op.name(),
                a.input,
                b.op.name(),
                b.input
            );
        }
    }
    let _ = writeln!(out, "params_m {}", stats.params_m());
    let _ = writeln!(out, "flops_g  {}", stats.flops_g());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolated_quartiles() {
        let s = summarize_rewards(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.p25, s.median, s.p75, s.max), (1.75, 2.5, 3.25, 4.0));
    }

    #[test]
    fn single_value_summary() {
        let s = summarize_rewards(&[7.5]).unwrap();
        assert_eq!((s.p25, s.median, s.p75, s.max), (7.5, 7.5, 7.5, 7.5));
        assert!(summarize_rewards(&[]).is_none());
    }

    #[test]
    fn odd_count_median_is_middle() {
        let s = summarize_rewards(&[10.0, 0.0, 5.0, 20.0, 15.0]).unwrap();
        assert_eq!((s.p25, s.median, s.p75), (5.0, 10.0, 15.0));
    }
}
