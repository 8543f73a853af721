use std::path::Path;

use serde::{Deserialize, Serialize};

use super::report::{read_header, read_log};
use super::RunError;

/// One row of the evolution table: an evaluated individual and its rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRow {
    pub generation: usize,
    /// `generation / (generations - 1)`, or 0 for single-generation runs.
    pub normalized_generation: f64,
    pub id: String,
    pub reward: f64,
    pub params_m: f64,
    pub flops_g: f64,
    pub front: usize,
    pub crowding: f64,
}

pub fn normalized_generation(generation: usize, generations: usize) -> f64 {
    if generations <= 1 {
        0.0
    } else {
        generation as f64 / (generations - 1) as f64
    }
}

/// One row per logged evaluation, in log order.
pub fn evolution_rows(dir: &Path) -> Result<Vec<EvolutionRow>, RunError> {
    let header = read_header(dir)?;
    let log = read_log(dir)?;
    if log.generations.is_empty() {
        return Err(RunError::NoGenerations(dir.to_path_buf()));
    }
    let total = header.config.generations;
    Ok(log
        .generations
        .iter()
        .flat_map(|g| {
            g.individuals.iter().map(move |i| EvolutionRow {
                generation: g.generation,
                normalized_generation: normalized_generation(g.generation, total),
                id: i.id.clone(),
                reward: i.reward,
                params_m: i.params_m,
                flops_g: i.flops_g,
                front: i.front,
                crowding: i.crowding,
            })
        })
        .collect())
}

pub fn write_evolution_csv<W: std::io::Write>(rows: &[EvolutionRow], out: W) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| RunError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| RunError::Csv(e.to_string()))
}

pub fn read_evolution_csv<R: std::io::Read>(input: R) -> Result<Vec<EvolutionRow>, RunError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| RunError::Csv(e.to_string()))
}

/// Writes the evolution table of the run in `dir` to `path`.
pub fn export_evolution_csv(dir: &Path, path: &Path) -> Result<usize, RunError> {
    let rows = evolution_rows(dir)?;
    let file = std::fs::File::create(path).map_err(|e| RunError::io(path, e))?;
    write_evolution_csv(&rows, file)?;
    Ok(rows.len())
}
