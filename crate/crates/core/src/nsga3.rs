//! NSGA-III: Das-Dennis reference points, min-max objective normalization,
//! perpendicular-distance association and niche-preserving truncation of
//! the last admitted front.

use crate::dataset::{Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::evo::{
    assign_ranks, evaluate_all, fast_nondominated_sort, initialize_population, polynomial_mutation,
    sbx_crossover, search_rng, Individual, RunOutcome, SearchConfig, VariationParams,
};
use crate::objectives::{Candidate, EvalConfig, Evaluator};
use crate::rng::Rng;

/// Ranges below this are treated as 1 during normalization.
pub const RANGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePointSet {
    pub points: Vec<Vec<f64>>,
    pub divisions: usize,
}

impl ReferencePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Every point of the unit simplex in `m` dimensions whose coordinates are
/// multiples of `1/p`, in ascending lexicographic order.
pub fn das_dennis(m: usize, p: usize) -> ReferencePointSet {
    assert!(m >= 2 && p >= 1, "das_dennis needs m >= 2 and p >= 1");
    fn fill(left: usize, slots: usize, p: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / p as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            fill(left - c, slots - 1, p, prefix, out);
            prefix.pop();
        }
    }
    let mut points = Vec::new();
    fill(p, m, p, &mut Vec::with_capacity(m), &mut points);
    ReferencePointSet { points, divisions: p }
}

/// Translates to the ideal point and scales each axis by its range over
/// `objs`. Degenerate ranges scale by 1.
pub fn normalize_objectives<T: AsRef<[f64]>>(objs: &[T]) -> Vec<Vec<f64>> {
    let Some(first) = objs.first() else {
        return Vec::new();
    };
    let m = first.as_ref().len();
    let mut ideal = vec![f64::INFINITY; m];
    let mut nadir = vec![f64::NEG_INFINITY; m];
    for o in objs {
        for (j, &v) in o.as_ref().iter().enumerate() {
            ideal[j] = ideal[j].min(v);
            nadir[j] = nadir[j].max(v);
        }
    }
    let scale: Vec<f64> = ideal
        .iter()
        .zip(&nadir)
        .map(|(lo, hi)| if hi - lo < RANGE_EPS { 1.0 } else { hi - lo })
        .collect();
    objs.iter()
        .map(|o| {
            o.as_ref()
                .iter()
                .enumerate()
                .map(|(j, &v)| (v - ideal[j]) / scale[j])
                .collect()
        })
        .collect()
}

/// Distance from `s` to the line through the origin along `r`.
pub fn perpendicular_distance(s: &[f64], r: &[f64]) -> f64 {
    let rr: f64 = r.iter().map(|x| x * x).sum();
    let rs: f64 = r.iter().zip(s).map(|(a, b)| a * b).sum();
    let t = rs / rr;
    s.iter()
        .zip(r)
        .map(|(si, ri)| {
            let d = si - t * ri;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub nearest: Vec<usize>,
    pub distance: Vec<f64>,
}

/// Nearest reference line per point; ties go to the lower reference index.
pub fn associate<T: AsRef<[f64]>>(normalized: &[T], refs: &ReferencePointSet) -> Association {
    let mut nearest = Vec::with_capacity(normalized.len());
    let mut distance = Vec::with_capacity(normalized.len());
    for s in normalized {
        let mut best = (0, f64::INFINITY);
        for (j, r) in refs.points.iter().enumerate() {
            let d = perpendicular_distance(s.as_ref(), r);
            if d < best.1 {
                best = (j, d);
            }
        }
        nearest.push(best.0);
        distance.push(best.1);
    }
    Association { nearest, distance }
}

/// Picks `k` of `candidates` (positions into `assoc`), filling the least
/// crowded reference points first. `niche_counts` enters holding the counts
/// of the already admitted members and is updated in place.
///
/// Each pick: choose uniformly among active reference points with minimal
/// count; if no remaining candidate is associated with it, deactivate it for
/// this call; otherwise take the closest associated candidate when the
/// count is 0, else a uniformly random one.
pub fn niche_select(
    k: usize,
    candidates: &[usize],
    assoc: &Association,
    niche_counts: &mut [usize],
    rng: &mut Rng,
) -> Vec<usize> {
    assert!(k <= candidates.len(), "cannot pick {k} of {}", candidates.len());
    let mut remaining = candidates.to_vec();
    let mut active = vec![true; niche_counts.len()];
    let mut picked = Vec::with_capacity(k);
    let mut pool = Vec::new();
    let mut members = Vec::new();

    while picked.len() < k {
        let min = niche_counts
            .iter()
            .zip(&active)
            .filter(|(_, &a)| a)
            .map(|(&c, _)| c)
            .min()
            .expect("every reference point deactivated before the selection was complete");
        pool.clear();
        pool.extend((0..niche_counts.len()).filter(|&j| active[j] && niche_counts[j] == min));
        let chosen_ref = pool[rng.below(pool.len())];

        members.clear();
        members.extend(
            remaining
                .iter()
                .enumerate()
                .filter(|(_, &s)| assoc.nearest[s] == chosen_ref)
                .map(|(pos, _)| pos),
        );
        if members.is_empty() {
            active[chosen_ref] = false;
            continue;
        }
        let pos = if niche_counts[chosen_ref] == 0 {
            let mut best = members[0];
            for &m in &members[1..] {
                if assoc.distance[remaining[m]] < assoc.distance[remaining[best]] {
                    best = m;
                }
            }
            best
        } else {
            members[rng.below(members.len())]
        };
        picked.push(remaining.remove(pos));
        niche_counts[chosen_ref] += 1;
    }
    picked
}

/// Chooses `n` survivors out of `objs`. Whole fronts are admitted while they
/// fit; the last, partially admitted front is truncated by niching. The rng
/// is untouched when the fronts fill `n` exactly.
pub fn environmental_selection<T: AsRef<[f64]>>(
    objs: &[T],
    n: usize,
    refs: &ReferencePointSet,
    rng: &mut Rng,
) -> Vec<usize> {
    let partition = fast_nondominated_sort(objs);
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut last: &[usize] = &[];
    for front in &partition.fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front);
            if chosen.len() == n {
                break;
            }
        } else {
            last = front;
            break;
        }
    }
    if chosen.len() == n || last.is_empty() {
        return chosen;
    }

    let k = n - chosen.len();
    let members: Vec<usize> = chosen.iter().chain(last).copied().collect();
    let member_objs: Vec<&[f64]> = members.iter().map(|&i| objs[i].as_ref()).collect();
    let normalized = normalize_objectives(&member_objs);
    let assoc = associate(&normalized, refs);

    let mut counts = vec![0usize; refs.len()];
    for &j in &assoc.nearest[..chosen.len()] {
        counts[j] += 1;
    }
    let last_positions: Vec<usize> = (chosen.len()..members.len()).collect();
    let picks = niche_select(k, &last_positions, &assoc, &mut counts, rng);
    chosen.extend(picks.into_iter().map(|p| members[p]));
    chosen
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nsga3Config {
    pub search: SearchConfig,
    /// Das-Dennis divisions per objective.
    pub divisions: usize,
}

impl Nsga3Config {
    pub const OBJECTIVES: usize = 3;

    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if self.divisions == 0 {
            return Err(Error::Config("reference divisions must be positive".into()));
        }
        Ok(())
    }
}

impl Default for Nsga3Config {
    fn default() -> Self {
        Nsga3Config {
            search: SearchConfig {
                population_size: 100,
                max_evaluations: 100_000,
                variation: None,
                seed: 0,
            },
            divisions: 13,
        }
    }
}

/// Random pairing of the parent population into `size` offspring.
pub(crate) fn random_pairing_offspring(
    parents: &[Individual],
    size: usize,
    params: &VariationParams,
    rng: &mut Rng,
) -> Vec<Candidate> {
    let mut offspring = Vec::with_capacity(size);
    let mut order: Vec<usize> = Vec::new();
    let mut cursor = 0;
    while offspring.len() < size {
        let (a, b) = if parents.len() == 1 {
            (0, 0)
        } else {
            if cursor + 1 >= order.len() {
                order = rng.permutation(parents.len());
                cursor = 0;
            }
            cursor += 2;
            (order[cursor - 2], order[cursor - 1])
        };
        let (c1, c2) = sbx_crossover(&parents[a].candidate, &parents[b].candidate, params, rng);
        offspring.push(polynomial_mutation(&c1, params, rng));
        if offspring.len() < size {
            offspring.push(polynomial_mutation(&c2, params, rng));
        }
    }
    offspring
}

/// Runs NSGA-III until at least `max_evaluations` evaluations are spent.
pub fn evolve_with(evaluator: &Evaluator<'_>, cfg: &Nsga3Config) -> Result<RunOutcome> {
    cfg.validate()?;
    let ps = cfg.search.population_size;
    let n = evaluator.feature_count();
    let params = cfg.search.variation_for(n);
    let refs = das_dennis(Nsga3Config::OBJECTIVES, cfg.divisions);
    let mut rng = search_rng(cfg.search.seed);

    let mut population = evaluate_all(evaluator, initialize_population(n, ps, &mut rng))?;
    assign_ranks(&mut population);
    let initial_population = population.clone();
    let mut evaluations = ps;
    let mut generations = 0;

    while evaluations < cfg.search.max_evaluations {
        let offspring = random_pairing_offspring(&population, ps, &params, &mut rng);
        let offspring = evaluate_all(evaluator, offspring)?;
        evaluations += offspring.len();

        let mut combined = population;
        combined.extend(offspring);
        let objs: Vec<[f64; 3]> = combined.iter().map(Individual::objective_array).collect();
        let survivors = environmental_selection(&objs, ps, &refs, &mut rng);

        let mut slots: Vec<Option<Individual>> = combined.into_iter().map(Some).collect();
        population = survivors
            .into_iter()
            .map(|i| slots[i].take().expect("survivor selected twice"))
            .collect();
        assign_ranks(&mut population);
        generations += 1;
    }

    Ok(RunOutcome {
        population,
        initial_population,
        evaluations,
        generations,
    })
}

pub fn evolve(ds: &Dataset, split: &SplitSpec, eval: EvalConfig, cfg: &Nsga3Config) -> Result<RunOutcome> {
    let evaluator = Evaluator::new(ds, split, eval)?;
    evolve_with(&evaluator, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_rng;

    #[test]
    fn lattice_sizes() {
        let r = das_dennis(3, 4);
        assert_eq!(r.len(), 15);
        for corner in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            assert!(r.points.iter().any(|p| p == &corner));
        }
        let r = das_dennis(3, 1);
        assert_eq!(r.points, vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
        assert_eq!(das_dennis(3, 13).len(), 105);
        assert_eq!(das_dennis(2, 5).len(), 6);
    }

    #[test]
    fn lattice_is_lexicographic() {
        let r = das_dennis(3, 6);
        for w in r.points.windows(2) {
            assert_eq!(w[0].partial_cmp(&w[1]), Some(std::cmp::Ordering::Less));
        }
    }

    #[test]
    fn normalize_examples() {
        let unit = vec![vec![0.0, 1.0, 0.5], vec![1.0, 0.0, 0.0], vec![0.5, 0.5, 1.0]];
        assert_eq!(normalize_objectives(&unit), unit);

        let pts = vec![vec![2.0, 10.0, 0.0], vec![4.0, 20.0, 0.0]];
        assert_eq!(
            normalize_objectives(&pts),
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]]
        );

        let constant = vec![vec![0.3, 7.0], vec![0.6, 7.0]];
        let out = normalize_objectives(&constant);
        assert_eq!(out[0][1], 0.0);
        assert_eq!(out[1][1], 0.0);
    }

    #[test]
    fn distance_examples() {
        assert!(perpendicular_distance(&[0.2, 0.2, 0.2], &[1.0, 1.0, 1.0]).abs() < 1e-15);
        assert_eq!(perpendicular_distance(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), 1.0);
    }

    #[test]
    fn association_tie_prefers_lower_index() {
        let refs = ReferencePointSet {
            points: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            divisions: 1,
        };
        let a = associate(&[vec![0.5, 0.5]], &refs);
        assert_eq!(a.nearest, vec![0]);
    }

    fn assoc_single(distances: &[f64]) -> Association {
        Association {
            nearest: vec![0; distances.len()],
            distance: distances.to_vec(),
        }
    }

    #[test]
    fn niche_closest_wins_on_empty_niche() {
        let mut rng = make_rng(0);
        let assoc = assoc_single(&[0.1, 0.5]);
        let mut counts = vec![0];
        assert_eq!(niche_select(1, &[0, 1], &assoc, &mut counts, &mut rng), vec![0]);
        assert_eq!(counts, vec![1]);

        let assoc = assoc_single(&[0.5, 0.1]);
        let mut counts = vec![0];
        assert_eq!(niche_select(1, &[0, 1], &assoc, &mut counts, &mut rng), vec![1]);
    }

    #[test]
    fn niche_forced_pick() {
        let mut rng = make_rng(0);
        let assoc = Association {
            nearest: vec![0, 1],
            distance: vec![0.3, 0.9],
        };
        let mut counts = vec![5, 2];
        assert_eq!(niche_select(1, &[1], &assoc, &mut counts, &mut rng), vec![1]);
        assert_eq!(counts, vec![5, 3]);
    }

    #[test]
    fn niche_exhaustion_takes_everyone() {
        let mut rng = make_rng(7);
        let assoc = Association {
            nearest: vec![0, 2, 2, 1, 0],
            distance: vec![0.1, 0.2, 0.3, 0.4, 0.5],
        };
        let mut counts = vec![1, 0, 3];
        let mut got = niche_select(5, &[0, 1, 2, 3, 4], &assoc, &mut counts, &mut rng);
        got.sort_unstable();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
        assert_eq!(counts.iter().sum::<usize>(), 4 + 5);
    }

    #[test]
    fn exact_fill_skips_niching() {
        // Two fronts of two points each; n = 2 takes the first front whole.
        let objs = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 2.0, 0.0], [2.0, 1.0, 0.0]];
        let refs = das_dennis(3, 4);
        let mut rng = make_rng(3);
        let before = rng.clone().next_u64();
        let chosen = environmental_selection(&objs, 2, &refs, &mut rng);
        assert_eq!(chosen, vec![0, 1]);
        assert_eq!(rng.next_u64(), before);
    }
}
