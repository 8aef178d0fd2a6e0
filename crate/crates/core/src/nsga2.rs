//! NSGA-II baseline: crowding-distance truncation and binary tournament
//! mating on (rank, crowding). Encoding, objectives, sorting and variation
//! are shared with NSGA-III, including the initial population.

use crate::dataset::{Dataset, SplitSpec};
use crate::error::Result;
use crate::evo::{
    assign_ranks, evaluate_all, fast_nondominated_sort, initialize_population, polynomial_mutation,
    sbx_crossover, search_rng, Individual, RunOutcome, SearchConfig,
};
use crate::objectives::{EvalConfig, Evaluator};
use crate::rng::Rng;

/// Crowding distance of each member of one front. Boundary members of
/// every objective get infinity; an objective with zero range adds 0.
pub fn crowding_distance<T: AsRef<[f64]>>(front: &[T]) -> Vec<f64> {
    let len = front.len();
    if len <= 2 {
        return vec![f64::INFINITY; len];
    }
    let m = front[0].as_ref().len();
    let mut dist = vec![0.0; len];
    let mut order: Vec<usize> = (0..len).collect();
    for obj in 0..m {
        let value = |i: usize| front[i].as_ref()[obj];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let (lo, hi) = (value(order[0]), value(order[len - 1]));
        dist[order[0]] = f64::INFINITY;
        dist[order[len - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..len - 1 {
            let i = order[w];
            dist[i] += (value(order[w + 1]) - value(order[w - 1])) / range;
        }
    }
    dist
}

/// Survivor indices: whole fronts while they fit, then the last front by
/// descending crowding distance (lower index first on ties).
pub fn crowding_selection<T: AsRef<[f64]>>(objs: &[T], n: usize) -> Vec<usize> {
    let partition = fast_nondominated_sort(objs);
    let mut chosen = Vec::with_capacity(n);
    for front in &partition.fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front);
            if chosen.len() == n {
                break;
            }
            continue;
        }
        let members: Vec<&[f64]> = front.iter().map(|&i| objs[i].as_ref()).collect();
        let crowd = crowding_distance(&members);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(front[a].cmp(&front[b])));
        let k = n - chosen.len();
        chosen.extend(order[..k].iter().map(|&p| front[p]));
        break;
    }
    chosen
}

/// Crowding distance of every population member within its own front.
fn population_crowding(pop: &[Individual]) -> Vec<f64> {
    let objs: Vec<[f64; 3]> = pop.iter().map(Individual::objective_array).collect();
    let partition = fast_nondominated_sort(&objs);
    let mut crowd = vec![0.0; pop.len()];
    for front in &partition.fronts {
        let members: Vec<[f64; 3]> = front.iter().map(|&i| objs[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            crowd[i] = d;
        }
    }
    crowd
}

/// Two uniform draws; lower rank wins, then larger crowding, then the first.
fn tournament(pop: &[Individual], crowd: &[f64], rng: &mut Rng) -> usize {
    let a = rng.below(pop.len());
    let b = rng.below(pop.len());
    let (ra, rb) = (pop[a].rank.unwrap_or(usize::MAX), pop[b].rank.unwrap_or(usize::MAX));
    if rb < ra || (rb == ra && crowd[b] > crowd[a]) {
        b
    } else {
        a
    }
}

pub fn evolve_with(evaluator: &Evaluator<'_>, cfg: &SearchConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let ps = cfg.population_size;
    let n = evaluator.feature_count();
    let params = cfg.variation_for(n);
    let mut rng = search_rng(cfg.seed);

    let mut population = evaluate_all(evaluator, initialize_population(n, ps, &mut rng))?;
    assign_ranks(&mut population);
    let initial_population = population.clone();
    let mut evaluations = ps;
    let mut generations = 0;

    while evaluations < cfg.max_evaluations {
        let crowd = population_crowding(&population);
        let mut offspring = Vec::with_capacity(ps);
        while offspring.len() < ps {
            let a = tournament(&population, &crowd, &mut rng);
            let b = tournament(&population, &crowd, &mut rng);
            let (c1, c2) = sbx_crossover(&population[a].candidate, &population[b].candidate, &params, &mut rng);
            offspring.push(polynomial_mutation(&c1, &params, &mut rng));
            if offspring.len() < ps {
                offspring.push(polynomial_mutation(&c2, &params, &mut rng));
            }
        }
        let offspring = evaluate_all(evaluator, offspring)?;
        evaluations += offspring.len();

        let mut combined = population;
        combined.extend(offspring);
        let objs: Vec<[f64; 3]> = combined.iter().map(Individual::objective_array).collect();
        let survivors = crowding_selection(&objs, ps);
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

pub fn nsga2_evolve(ds: &Dataset, split: &SplitSpec, eval: EvalConfig, cfg: &SearchConfig) -> Result<RunOutcome> {
    let evaluator = Evaluator::new(ds, split, eval)?;
    evolve_with(&evaluator, cfg)
}
