use serde::{Deserialize, Serialize};

use super::objectives::{dominates, ObjectiveVector};
use super::MoeaError;

/// Fast non-dominated sort over minimized points.
///
/// Returns the fronts in order; indices within a front are ascending.
pub fn sort_points<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_set: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominates_set[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(b, a) {
                dominates_set[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_set[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Non-dominated sort of objective vectors in their minimized form.
pub fn non_dominated_sort(objectives: &[ObjectiveVector]) -> Result<Vec<Vec<usize>>, MoeaError> {
    if let Some(index) = objectives.iter().position(|o| !o.is_finite()) {
        return Err(MoeaError::NonFinite { index });
    }
    let points: Vec<[f64; 3]> = objectives.iter().map(ObjectiveVector::minimized).collect();
    Ok(sort_points(&points))
}

/// Crowding distance of every member of one front.
///
/// Per objective the members are sorted (ties by position), both ends get
/// `+inf`, and each interior member accumulates `(next - prev) / (max - min)`.
/// Objectives with `max == min` add nothing to interior members.
pub fn crowding_distance<P: AsRef<[f64]>>(front: &[P]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].as_ref().len();
    let mut dist = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let value = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let (lo, hi) = (value(order[0]), value(order[n - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            dist[w[1]] += (value(w[2]) - value(w[0])) / span;
        }
    }
    dist
}

/// An individual annotated with its Pareto front and crowding distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedIndividual {
    pub id: String,
    pub objectives: ObjectiveVector,
    pub front: usize,
    pub crowding: f64,
}

/// Sorts `objectives` into fronts and attaches crowding distances.
/// Output order follows the input order.
pub fn rank_population(
    ids: &[String],
    objectives: &[ObjectiveVector],
) -> Result<Vec<RankedIndividual>, MoeaError> {
    assert_eq!(ids.len(), objectives.len(), "one id per objective vector");
    let fronts = non_dominated_sort(objectives)?;
    let mut front_of = vec![0; objectives.len()];
    let mut crowding = vec![0.0; objectives.len()];
    for (f, members) in fronts.iter().enumerate() {
        let points: Vec<[f64; 3]> = members.iter().map(|&i| objectives[i].minimized()).collect();
        for (&i, d) in members.iter().zip(crowding_distance(&points)) {
            front_of[i] = f;
            crowding[i] = d;
        }
    }
    Ok(ids
        .iter()
        .zip(objectives)
        .enumerate()
        .map(|(i, (id, o))| RankedIndividual {
            id: id.clone(),
            objectives: *o,
            front: front_of[i],
            crowding: crowding[i],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_derived_fronts() {
        // minimized a=(1,1,1), b=(2,2,2), c=(1,3,0)
        let pts = [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [1.0, 3.0, 0.0]];
        assert_eq!(sort_points(&pts), vec![vec![0, 2], vec![1]]);
        let objs: Vec<_> = pts.iter().map(|p| ObjectiveVector::new(-p[0], p[1], p[2])).collect();
        assert_eq!(non_dominated_sort(&objs).unwrap(), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn trivial_populations() {
        assert_eq!(sort_points(&[[3.0, 1.0]]), vec![vec![0]]);
        assert_eq!(sort_points(&[[1.0, 2.0, 3.0]; 5]), vec![vec![0, 1, 2, 3, 4]]);
        assert!(sort_points::<[f64; 3]>(&[]).is_empty());
    }

    #[test]
    fn non_finite_is_rejected() {
        let objs = [ObjectiveVector::new(1.0, f64::INFINITY, 0.0)];
        assert_eq!(non_dominated_sort(&objs), Err(MoeaError::NonFinite { index: 0 }));
    }

    #[test]
    fn crowding_hand_example() {
        let d = crowding_distance(&[[0.0, 10.0], [5.0, 5.0], [10.0, 0.0]]);
        assert_eq!(d, vec![f64::INFINITY, 2.0, f64::INFINITY]);
    }

    #[test]
    fn crowding_small_and_degenerate_fronts() {
        assert_eq!(crowding_distance(&[[1.0, 2.0]]), vec![f64::INFINITY]);
        assert_eq!(crowding_distance(&[[1.0, 2.0], [0.0, 3.0]]), vec![f64::INFINITY; 2]);
        let d = crowding_distance(&[[1.0, 1.0]; 4]);
        assert_eq!(d.iter().filter(|x| x.is_infinite()).count(), 2);
        assert_eq!(d.iter().filter(|&&x| x == 0.0).count(), 2);
    }

    #[test]
    fn ranking_attaches_fronts() {
        let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let objs = [
            ObjectiveVector::new(-1.0, 1.0, 1.0),
            ObjectiveVector::new(-2.0, 2.0, 2.0),
            ObjectiveVector::new(-1.0, 3.0, 0.0),
        ];
        let r = rank_population(&ids, &objs).unwrap();
        assert_eq!(r.iter().map(|x| x.front).collect::<Vec<_>>(), [0, 1, 0]);
        assert!(r.iter().all(|x| x.crowding.is_infinite()));
    }
}
