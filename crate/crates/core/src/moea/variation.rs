use rand::Rng;

use super::params::EvolutionParams;
use super::MoeaError;
use crate::search_space::{input_range, CellKind, Chromosome, Genesis, OperatorKind};

/// One-point crossover at block boundaries, independently per cell.
///
/// Draws, in order: the crossover probability from
/// `params.crossover_prob_range`, the accept/reject uniform, and (when
/// accepted and there are at least two blocks) one cut point for the normal
/// cell and one for the reduction cell. Children swap block suffixes from the
/// cut; rejected pairs produce clones.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    ids: (String, String),
    rng: &mut R,
    params: &EvolutionParams,
) -> Result<(Chromosome, Chromosome), MoeaError> {
    for kind in [CellKind::Normal, CellKind::Reduction] {
        let (l, r) = (p1.genome.cell(kind).blocks.len(), p2.genome.cell(kind).blocks.len());
        if l != r {
            return Err(MoeaError::BlockMismatch { left: l, right: r });
        }
    }
    let (lo, hi) = params.crossover_prob_range;
    let p_c = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let accept = rng.random::<f64>() < p_c;

    let mut g1 = p1.genome.clone();
    let mut g2 = p2.genome.clone();
    let blocks = g1.normal.blocks.len();
    if accept && blocks >= 2 {
        for kind in [CellKind::Normal, CellKind::Reduction] {
            let cut = rng.random_range(1..blocks);
            let (c1, c2) = (g1.cell_mut(kind), g2.cell_mut(kind));
            c1.blocks[cut..].swap_with_slice(&mut c2.blocks[cut..]);
        }
    }
    let parents = vec![p1.id.clone(), p2.id.clone()];
    Ok((
        Chromosome::new(ids.0, g1).with_lineage(Genesis::Crossover, parents.clone()),
        Chromosome::new(ids.1, g2).with_lineage(Genesis::Crossover, parents),
    ))
}

/// Per-gene mutation.
///
/// Genes are visited normal cell first, block-major, slot `a` before `b`. Each
/// gene draws one uniform; when it falls below `mutation_prob` a fair coin
/// picks the field, which is then redrawn uniformly from its other legal
/// values (operators from `operators`, inputs from the positional range).
///
/// The result carries `id`. If `id` differs from the input's id the input
/// becomes the parent; otherwise the input's parents are kept.
pub fn mutate<R: Rng + ?Sized>(
    c: &Chromosome,
    id: String,
    operators: &[OperatorKind],
    rng: &mut R,
    params: &EvolutionParams,
) -> Chromosome {
    let mut genome = c.genome.clone();
    let mut changed = false;
    for kind in [CellKind::Normal, CellKind::Reduction] {
        for (k, block) in genome.cell_mut(kind).blocks.iter_mut().enumerate() {
            for gene in block.iter_mut() {
                if rng.random::<f64>() >= params.mutation_prob {
                    continue;
                }
                if rng.random_bool(0.5) {
                    let others: Vec<OperatorKind> =
                        operators.iter().copied().filter(|&o| o != gene.op).collect();
                    if !others.is_empty() {
                        gene.op = others[rng.random_range(0..others.len())];
                        changed = true;
                    }
                } else {
                    let range = input_range(k);
                    if range > 1 {
                        let draw = rng.random_range(0..range - 1);
                        gene.input = if draw >= gene.input { draw + 1 } else { draw };
                        changed = true;
                    }
                }
            }
        }
    }

    let inherited = c.lineage.as_ref();
    let parents = if id != c.id {
        vec![c.id.clone()]
    } else {
        inherited.map(|l| l.parents.clone()).unwrap_or_default()
    };
    let genesis = match (changed, inherited) {
        (false, Some(l)) if id == c.id => l.genesis,
        _ => Genesis::Mutation,
    };
    Chromosome::new(id, genome).with_lineage(genesis, parents)
}
