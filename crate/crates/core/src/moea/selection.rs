use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use super::params::EvolutionParams;
use super::sorting::RankedIndividual;

/// Total order used by tournaments and survival: lower front first, then
/// larger crowding distance, then ascending id.
pub fn compare_ranked(a: &RankedIndividual, b: &RankedIndividual) -> Ordering {
    a.front
        .cmp(&b.front)
        .then_with(|| b.crowding.total_cmp(&a.crowding))
        .then_with(|| a.id.cmp(&b.id))
}

/// Pareto tournament selection.
///
/// Each round shuffles the population, splits it into subsets of
/// `tournament_size` (the last may be smaller) and takes each subset's best
/// member; rounds repeat until `n_parents` winners are collected.
pub fn tournament_select<R: Rng + ?Sized>(
    ranked: &[RankedIndividual],
    n_parents: usize,
    tournament_size: usize,
    rng: &mut R,
) -> Vec<String> {
    assert!(!ranked.is_empty(), "tournament over an empty population");
    let size = tournament_size.max(1);
    let mut winners = Vec::with_capacity(n_parents);
    let mut order: Vec<usize> = (0..ranked.len()).collect();
    while winners.len() < n_parents {
        order.sort_unstable();
        order.shuffle(rng);
        for subset in order.chunks(size) {
            if winners.len() == n_parents {
                break;
            }
            let best = subset
                .iter()
                .map(|&i| &ranked[i])
                .min_by(|a, b| compare_ranked(a, b))
                .expect("chunks are non-empty");
            winners.push(best.id.clone());
        }
    }
    winners
}

/// Number of survivors: `clamp(round(survival_prob * pop_size), 1, 4)`,
/// or zero when survival is disabled.
pub fn survivor_count(pop_size: usize, survival_prob: f64) -> usize {
    if survival_prob <= 0.0 || pop_size == 0 {
        return 0;
    }
    let n = (survival_prob * pop_size as f64).round() as usize;
    n.clamp(1, 4).min(pop_size)
}

/// Picks survivors by [`compare_ranked`]. When `elite` is given and survival is
/// enabled, that individual is always kept and takes the first slot.
pub fn survive(
    ranked: &[RankedIndividual],
    pop_size: usize,
    params: &EvolutionParams,
    elite: Option<&str>,
) -> Vec<String> {
    let n = survivor_count(pop_size, params.survival_prob).min(ranked.len());
    if n == 0 {
        return Vec::new();
    }
    let mut sorted: Vec<&RankedIndividual> = ranked.iter().collect();
    sorted.sort_by(|a, b| compare_ranked(a, b));
    let mut out: Vec<String> = Vec::with_capacity(n);
    if let Some(e) = elite.filter(|e| ranked.iter().any(|r| r.id == *e)) {
        out.push(e.to_string());
    }
    for r in sorted {
        if out.len() == n {
            break;
        }
        if !out.contains(&r.id) {
            out.push(r.id.clone());
        }
    }
    out
}
