//! Uniform random sampling with a non-dominated archive. Used as the floor
//! the evolutionary searches must beat at equal budget.

use crate::error::Result;
use crate::evo::{assign_ranks, dominates, evaluate_all, initialize_population, search_rng, Individual, RunOutcome, SearchConfig};
use crate::objectives::Evaluator;

/// Samples `max_evaluations` uniform candidates in batches of the population
/// size. The first batch equals the evolutionary searches' generation 0.
/// The returned population is the non-dominated archive.
pub fn random_search(evaluator: &Evaluator<'_>, cfg: &SearchConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let n = evaluator.feature_count();
    let ps = cfg.population_size;
    let mut rng = search_rng(cfg.seed);

    let mut archive: Vec<Individual> = Vec::new();
    let mut initial_population = Vec::new();
    let mut evaluations = 0;
    let mut batches: usize = 0;
    while evaluations < cfg.max_evaluations {
        let size = ps.min(cfg.max_evaluations - evaluations);
        let mut batch = evaluate_all(evaluator, initialize_population(n, size, &mut rng))?;
        evaluations += size;
        if batches == 0 {
            assign_ranks(&mut batch);
            initial_population = batch.clone();
        }
        for ind in batch {
            let obj = ind.objective_array();
            if archive.iter().any(|a| dominates(&a.objective_array(), &obj)) {
                continue;
            }
            archive.retain(|a| !dominates(&obj, &a.objective_array()));
            archive.push(ind);
        }
        batches += 1;
    }
    assign_ranks(&mut archive);
    Ok(RunOutcome {
        population: archive,
        initial_population,
        evaluations,
        generations: batches.saturating_sub(1),
    })
}
