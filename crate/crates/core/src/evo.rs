//! Machinery shared by the evolutionary algorithms: Pareto dominance, fast
//! non-dominated sorting, simulated binary crossover and polynomial
//! mutation.

use crate::objectives::{Candidate, FeatureMask, ObjectiveVector};
use crate::rng::Rng;

/// `a` dominates `b` when it is no worse everywhere and strictly better
/// somewhere (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Population indices grouped by non-domination rank; `fronts[0]` is rank 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
}

impl FrontPartition {
    /// 1-based rank of every index.
    pub fn ranks(&self) -> Vec<usize> {
        let len = self.fronts.iter().map(Vec::len).sum();
        let mut ranks = vec![0; len];
        for (r, front) in self.fronts.iter().enumerate() {
            for &i in front {
                ranks[i] = r + 1;
            }
        }
        ranks
    }

    pub fn len(&self) -> usize {
        self.fronts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fronts.is_empty()
    }
}

/// Deb's fast non-dominated sort. `dominated_by_count[p]` counts the points
/// dominating `p`; `dominates_list[p]` holds the points `p` dominates.
/// Fronts are peeled by decrementing the counts.
pub fn fast_nondominated_sort<T: AsRef<[f64]>>(objs: &[T]) -> FrontPartition {
    let n = objs.len();
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dominated_by_count = vec![0usize; n];
    let mut current = Vec::new();

    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let (a, b) = (objs[p].as_ref(), objs[q].as_ref());
            if dominates(a, b) {
                dominates_list[p].push(q);
            } else if dominates(b, a) {
                dominated_by_count[p] += 1;
            }
        }
        if dominated_by_count[p] == 0 {
            current.push(p);
        }
    }

    let mut fronts = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominates_list[p] {
                dominated_by_count[q] -= 1;
                if dominated_by_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        fronts.push(current);
        current = next;
    }
    FrontPartition { fronts }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub candidate: Candidate,
    pub mask: FeatureMask,
    pub objectives: ObjectiveVector,
    pub rank: Option<usize>,
}

impl Individual {
    pub fn objective_array(&self) -> [f64; 3] {
        self.objectives.to_array()
    }
}

/// Uniform `[0, 1]^n` candidates, drawn individual by individual.
pub fn initialize_population(n: usize, size: usize, rng: &mut Rng) -> Vec<Candidate> {
    (0..size)
        .map(|_| Candidate::clamped((0..n).map(|_| rng.next_f64()).collect()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationParams {
    pub crossover_probability: f64,
    pub crossover_eta: f64,
    /// Chance that an individual variable takes part in a crossover.
    pub crossover_variable_probability: f64,
    pub mutation_probability: f64,
    pub mutation_eta: f64,
    pub lower: f64,
    pub upper: f64,
}

impl VariationParams {
    /// `p_c = 1`, `η_c = 30`, `p_m = 1/n`, `η_m = 20` on `[0, 1]`.
    pub fn defaults_for(n: usize) -> Self {
        VariationParams {
            crossover_probability: 1.0,
            crossover_eta: 30.0,
            crossover_variable_probability: 0.5,
            mutation_probability: 1.0 / n.max(1) as f64,
            mutation_eta: 20.0,
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let probs = [
            self.crossover_probability,
            self.crossover_variable_probability,
            self.mutation_probability,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(crate::Error::Config("variation probabilities must lie in [0, 1]".into()));
        }
        if !(self.crossover_eta > 0.0 && self.mutation_eta > 0.0) {
            return Err(crate::Error::Config("distribution indices must be positive".into()));
        }
        if self.lower.partial_cmp(&self.upper) != Some(std::cmp::Ordering::Less) {
            return Err(crate::Error::Config("lower bound must be below upper bound".into()));
        }
        Ok(())
    }
}

const SAME_VALUE_EPS: f64 = 1e-14;

/// Simulated binary crossover. Draw order: one gate draw for the pair, then
/// per variable a participation draw, and for participating variables
/// that differ a spread draw and a swap draw.
pub fn sbx_crossover(
    p1: &Candidate,
    p2: &Candidate,
    params: &VariationParams,
    rng: &mut Rng,
) -> (Candidate, Candidate) {
    assert_eq!(p1.len(), p2.len(), "parents differ in length");
    let mut c1 = p1.position().to_vec();
    let mut c2 = p2.position().to_vec();
    if !rng.chance(params.crossover_probability) {
        return (p1.clone(), p2.clone());
    }
    let exponent = 1.0 / (params.crossover_eta + 1.0);
    for i in 0..c1.len() {
        if !rng.chance(params.crossover_variable_probability) {
            continue;
        }
        let (x1, x2) = (c1[i], c2[i]);
        if (x1 - x2).abs() <= SAME_VALUE_EPS {
            continue;
        }
        let u = rng.next_f64();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(exponent)
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(exponent)
        };
        let mut y1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2);
        let mut y2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2);
        if rng.chance(0.5) {
            std::mem::swap(&mut y1, &mut y2);
        }
        c1[i] = y1.clamp(params.lower, params.upper);
        c2[i] = y2.clamp(params.lower, params.upper);
    }
    (Candidate::clamped(c1), Candidate::clamped(c2))
}

/// Deb's bounded polynomial mutation. Per variable: a gate draw, then one
/// draw for the perturbation if the gate opens.
pub fn polynomial_mutation(c: &Candidate, params: &VariationParams, rng: &mut Rng) -> Candidate {
    let (lo, hi) = (params.lower, params.upper);
    let span = hi - lo;
    let power = params.mutation_eta + 1.0;
    let exponent = 1.0 / power;
    let mut x = c.position().to_vec();
    for xi in &mut x {
        if !rng.chance(params.mutation_probability) {
            continue;
        }
        let u = rng.next_f64();
        let delta1 = (*xi - lo) / span;
        let delta2 = (hi - *xi) / span;
        let deltaq = if u < 0.5 {
            let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1).powf(power);
            val.powf(exponent) - 1.0
        } else {
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2).powf(power);
            1.0 - val.powf(exponent)
        };
        *xi = (*xi + deltaq * span).clamp(lo, hi);
    }
    Candidate::clamped(x)
}


/// Settings shared by every population-based search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub population_size: usize,
    pub max_evaluations: usize,
    /// `None` means [`VariationParams::defaults_for`] the dataset width.
    pub variation: Option<VariationParams>,
    pub seed: u64,
}

impl SearchConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.population_size == 0 {
            return Err(crate::Error::Config("population size must be positive".into()));
        }
        if self.max_evaluations < self.population_size {
            return Err(crate::Error::Config(format!(
                "evaluation budget {} is smaller than one population ({})",
                self.max_evaluations, self.population_size
            )));
        }
        if let Some(v) = &self.variation {
            v.validate()?;
        }
        Ok(())
    }

    pub fn variation_for(&self, n: usize) -> VariationParams {
        self.variation.unwrap_or_else(|| VariationParams::defaults_for(n))
    }
}

/// The search stream for `seed`. It is the seed's generator jumped ahead by
/// 2^128 draws, so it never overlaps `make_rng(seed)`, which the harness
/// uses for splitting.
pub fn search_rng(seed: u64) -> Rng {
    crate::rng::make_rng(seed).jumped()
}

/// Result of one search run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub population: Vec<Individual>,
    pub initial_population: Vec<Individual>,
    pub evaluations: usize,
    pub generations: usize,
}

impl RunOutcome {
    /// Rank-1 members of the final population.
    pub fn first_front(&self) -> Vec<&Individual> {
        self.population.iter().filter(|i| i.rank == Some(1)).collect()
    }
}

/// Evaluates candidates (order preserved) into unranked individuals.
pub fn evaluate_all(
    evaluator: &crate::objectives::Evaluator<'_>,
    candidates: Vec<Candidate>,
) -> crate::Result<Vec<Individual>> {
    let evaluated = evaluator.evaluate_batch(&candidates)?;
    Ok(candidates
        .into_iter()
        .zip(evaluated)
        .map(|(candidate, (mask, objectives))| Individual {
            candidate,
            mask,
            objectives,
            rank: None,
        })
        .collect())
}

/// Sorts `pop` and stores each member's rank; returns the partition.
pub fn assign_ranks(pop: &mut [Individual]) -> FrontPartition {
    let objs: Vec<[f64; 3]> = pop.iter().map(Individual::objective_array).collect();
    let partition = fast_nondominated_sort(&objs);
    for (ind, rank) in pop.iter_mut().zip(partition.ranks()) {
        ind.rank = Some(rank);
    }
    partition
}
