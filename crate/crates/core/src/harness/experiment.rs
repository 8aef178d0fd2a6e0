//! Runs every (dataset, algorithm, run) cell of an experiment and persists
//! one record per cell.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{Algorithm, DatasetSpec, ExperimentConfig};
use super::record::{manifest_text, sort_points, timings_text, FrontPoint, RunRecord};
use crate::dataset::{load_csv, prepare, split, Dataset};
use crate::error::{Error, Result};
use crate::objectives::{Evaluator, FeatureMask};
use crate::{nsga2, nsga3, random_search};

#[derive(Debug, Default)]
pub struct ExperimentOutput {
    /// Ordered by (dataset, algorithm, run).
    pub records: Vec<RunRecord>,
    /// Datasets or cells that failed, with a diagnostic.
    pub failures: Vec<String>,
}

pub fn load_dataset(cfg: &ExperimentConfig, spec: &DatasetSpec) -> Result<Dataset> {
    prepare(load_csv(&spec.path, &cfg.csv_options(spec))?)
}

/// One run of one algorithm. The split and the search both derive from the
/// run seed, so every algorithm sees the same split for a given run index.
pub fn run_cell(
    cfg: &ExperimentConfig,
    name: &str,
    ds: &Dataset,
    algorithm: Algorithm,
    run: usize,
) -> Result<RunRecord> {
    let seed = cfg.run_seed(run);
    let started = Instant::now();
    let sp = split(ds, seed, cfg.train_fraction, cfg.folds)?;
    let evaluator = Evaluator::new(ds, &sp, cfg.eval_config())?;
    let outcome = match algorithm {
        Algorithm::Nsga3 => nsga3::evolve_with(&evaluator, &cfg.nsga3_config(seed))?,
        Algorithm::Nsga2 => nsga2::evolve_with(&evaluator, &cfg.search_config(seed))?,
        Algorithm::Random => random_search::random_search(&evaluator, &cfg.search_config(seed))?,
    };

    let mut unique: BTreeMap<FeatureMask, FrontPoint> = BTreeMap::new();
    for ind in outcome.first_front() {
        unique.entry(ind.mask.clone()).or_insert_with(|| FrontPoint {
            objectives: ind.objectives,
            mask: ind.mask.clone(),
        });
    }
    let mut train: Vec<FrontPoint> = unique.into_values().collect();
    sort_points(&mut train);
    let test = train
        .iter()
        .map(|p| {
            Ok(FrontPoint {
                objectives: evaluator.evaluate_on_test(&p.mask)?,
                mask: p.mask.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RunRecord {
        dataset: name.to_string(),
        algorithm: algorithm.id().to_string(),
        run,
        seed,
        features: ds.feature_count(),
        evaluations: outcome.evaluations,
        wall_time: Some(started.elapsed()),
        train,
        test,
    })
}

/// Runs the whole grid, writing `records/`, `manifest.csv` and
/// `timings.csv` under `out_dir`. A dataset that fails to load is logged and
/// skipped; the remaining cells still run.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let records_dir = out_dir.join("records");
    fs::create_dir_all(&records_dir).map_err(|e| Error::io(&records_dir, e))?;

    let mut output = ExperimentOutput::default();
    let mut loaded = Vec::new();
    for spec in &cfg.datasets {
        match load_dataset(cfg, spec) {
            Ok(ds) => loaded.push((spec, ds)),
            Err(e) => {
                log::error!("dataset {}: {e}", spec.name);
                output.failures.push(format!("dataset {}: {e}", spec.name));
            }
        }
    }

    let cells: Vec<(usize, Algorithm, usize)> = (0..loaded.len())
        .flat_map(|d| {
            cfg.algorithms
                .iter()
                .flat_map(move |&a| (0..cfg.runs).map(move |r| (d, a, r)))
        })
        .collect();

    let run_one = |&(d, algorithm, run): &(usize, Algorithm, usize)| -> Result<RunRecord> {
        let (spec, ds) = &loaded[d];
        let record = run_cell(cfg, &spec.name, ds, algorithm, run)?;
        record.write(&records_dir)?;
        log::info!(
            "{} {} run {}: {} front points, {} evaluations",
            spec.name,
            algorithm,
            run,
            record.train.len(),
            record.evaluations
        );
        Ok(record)
    };
    let results: Vec<Result<RunRecord>> = if cfg.parallel {
        cells.par_iter().map(run_one).collect()
    } else {
        cells.iter().map(run_one).collect()
    };

    for (cell, result) in cells.iter().zip(results) {
        match result {
            Ok(r) => output.records.push(r),
            Err(e) => {
                let (spec, _) = &loaded[cell.0];
                log::error!("{} {} run {}: {e}", spec.name, cell.1, cell.2);
                output.failures.push(format!("{} {} run {}: {e}", spec.name, cell.1, cell.2));
            }
        }
    }
    output
        .records
        .sort_by(|a, b| (&a.dataset, &a.algorithm, a.run).cmp(&(&b.dataset, &b.algorithm, b.run)));

    let manifest = out_dir.join("manifest.csv");
    fs::write(&manifest, manifest_text(&output.records)).map_err(|e| Error::io(&manifest, e))?;
    let timings = out_dir.join("timings.csv");
    fs::write(&timings, timings_text(&output.records)).map_err(|e| Error::io(&timings, e))?;
    Ok(output)
}
