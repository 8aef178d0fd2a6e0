//! Candidate encoding and the three feature-selection objectives.
//!
//! A candidate is a real vector in `[0, 1]^n`. Feature `i` is selected when
//! `x_i >= θ`. The objectives of the resulting mask are
//!
//! * `f1`: `1 - A_cor`, with `A_cor` the K-NN cross-validated accuracy on the
//!   training partition,
//! * `f2`: number of selected features,
//! * `f3`: `100 * lm / la`, the percentage of the dataset's missing cells
//!   that sit in selected columns (0 when the dataset is complete).

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::dataset::{Dataset, MissingProfile, SplitSpec};
use crate::error::{Error, Result};
use crate::knn::{cross_validated_accuracy, predict_rows, KnnConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate(Vec<f64>);

impl Candidate {
    pub fn new(position: Vec<f64>) -> Result<Self> {
        if let Some(bad) = position.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Contract(format!(
                "component {bad} = {} lies outside [0, 1]",
                position[bad]
            )));
        }
        Ok(Candidate(position))
    }

    /// Clamps every component into `[0, 1]`.
    pub fn clamped(mut position: Vec<f64>) -> Self {
        for x in &mut position {
            *x = x.clamp(0.0, 1.0);
        }
        Candidate(position)
    }

    pub fn position(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        FeatureMask { bits }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Data(format!("invalid mask character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(FeatureMask::from_bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn selected_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub threshold: f64,
    pub knn: KnnConfig,
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        self.knn.validate()
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            threshold: 0.6,
            knn: KnnConfig::default(),
        }
    }
}

/// Objective values in minimization order `(f1, f2, f3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    pub error_rate: f64,
    pub size: usize,
    pub missing_rate_pct: f64,
}

impl ObjectiveVector {
    pub fn to_array(&self) -> [f64; 3] {
        [self.error_rate, self.size as f64, self.missing_rate_pct]
    }
}

pub fn binarize(candidate: &Candidate, threshold: f64) -> FeatureMask {
    FeatureMask::from_bits(candidate.position().iter().map(|&x| x >= threshold).collect())
}

/// An empty mask gets the single feature with the largest component (lowest
/// index on ties). Non-empty masks pass through.
pub fn repair_empty(candidate: &Candidate, mask: FeatureMask) -> FeatureMask {
    if mask.selected_count() > 0 || candidate.is_empty() {
        return mask;
    }
    let mut best = 0;
    for (i, &x) in candidate.position().iter().enumerate() {
        if x > candidate.position()[best] {
            best = i;
        }
    }
    let mut bits = mask.bits;
    bits[best] = true;
    FeatureMask::from_bits(bits)
}

/// `lm`: missing cells in the selected columns.
pub fn selected_missing(mask: &FeatureMask, profile: &MissingProfile) -> usize {
    mask.bits()
        .iter()
        .zip(profile.per_feature())
        .filter(|(&b, _)| b)
        .map(|(_, &lm)| lm)
        .sum()
}

/// `100 * lm / la`, or 0 for a complete dataset.
pub fn missing_rate_pct(lm: usize, la: usize) -> f64 {
    if la == 0 {
        0.0
    } else {
        100.0 * lm as f64 / la as f64
    }
}

fn check_mask(mask: &FeatureMask, ds: &Dataset) -> Result<()> {
    if mask.len() != ds.feature_count() {
        return Err(Error::Contract(format!(
            "mask has {} bits, dataset has {} features",
            mask.len(),
            ds.feature_count()
        )));
    }
    Ok(())
}

fn size_and_missing(mask: &FeatureMask, ds: &Dataset) -> (usize, f64) {
    let profile = ds.profile();
    let lm = selected_missing(mask, profile);
    (mask.selected_count(), missing_rate_pct(lm, profile.total()))
}

/// Objectives of an already-binarized mask, `f1` from cross-validation on
/// the training partition.
pub fn evaluate_mask(mask: &FeatureMask, ds: &Dataset, split: &SplitSpec, cfg: &EvalConfig) -> Result<ObjectiveVector> {
    check_mask(mask, ds)?;
    let acc = cross_validated_accuracy(ds, &split.train, mask, &split.fold_of, &cfg.knn)?;
    let (size, missing_rate_pct) = size_and_missing(mask, ds);
    Ok(ObjectiveVector {
        error_rate: 1.0 - acc.mean_accuracy,
        size,
        missing_rate_pct,
    })
}

/// The repaired mask a candidate decodes to.
pub fn decode(candidate: &Candidate, threshold: f64) -> FeatureMask {
    repair_empty(candidate, binarize(candidate, threshold))
}

pub fn evaluate(candidate: &Candidate, ds: &Dataset, split: &SplitSpec, cfg: &EvalConfig) -> Result<ObjectiveVector> {
    if candidate.len() != ds.feature_count() {
        return Err(Error::Contract(format!(
            "candidate has {} components, dataset has {} features",
            candidate.len(),
            ds.feature_count()
        )));
    }
    evaluate_mask(&decode(candidate, cfg.threshold), ds, split, cfg)
}

/// Objectives on the held-out partition: every test row is classified by
/// K-NN over the whole training partition.
pub fn evaluate_on_test(mask: &FeatureMask, ds: &Dataset, split: &SplitSpec, cfg: &EvalConfig) -> Result<ObjectiveVector> {
    check_mask(mask, ds)?;
    if split.test.is_empty() {
        return Err(Error::Contract("test partition is empty".into()));
    }
    let predicted = predict_rows(ds, &split.train, &split.test, mask, cfg.knn.k)?;
    let correct = predicted
        .iter()
        .zip(&split.test)
        .filter(|&(&p, &r)| p == ds.label(r))
        .count();
    let (size, missing_rate_pct) = size_and_missing(mask, ds);
    Ok(ObjectiveVector {
        error_rate: 1.0 - correct as f64 / split.test.len() as f64,
        size,
        missing_rate_pct,
    })
}

/// Evaluation context for one (dataset, split) pair, with an optional
/// cache keyed by the decoded mask. The cache never changes results.
pub struct Evaluator<'a> {
    ds: &'a Dataset,
    split: &'a SplitSpec,
    cfg: EvalConfig,
    cache: Option<Mutex<HashMap<FeatureMask, ObjectiveVector>>>,
    parallel: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(ds: &'a Dataset, split: &'a SplitSpec, cfg: EvalConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Evaluator {
            ds,
            split,
            cfg,
            cache: Some(Mutex::new(HashMap::new())),
            parallel: false,
        })
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    /// Evaluate batches on the rayon pool.
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn dataset(&self) -> &Dataset {
        self.ds
    }

    pub fn split(&self) -> &SplitSpec {
        self.split
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    pub fn feature_count(&self) -> usize {
        self.ds.feature_count()
    }

    pub fn evaluate(&self, candidate: &Candidate) -> Result<(FeatureMask, ObjectiveVector)> {
        if candidate.len() != self.ds.feature_count() {
            return Err(Error::Contract(format!(
                "candidate has {} components, dataset has {} features",
                candidate.len(),
                self.ds.feature_count()
            )));
        }
        let mask = decode(candidate, self.cfg.threshold);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.lock().expect("cache poisoned").get(&mask) {
                return Ok((mask, *hit));
            }
        }
        let objs = evaluate_mask(&mask, self.ds, self.split, &self.cfg)?;
        if let Some(cache) = &self.cache {
            cache.lock().expect("cache poisoned").insert(mask.clone(), objs);
        }
        Ok((mask, objs))
    }

    pub fn evaluate_batch(&self, candidates: &[Candidate]) -> Result<Vec<(FeatureMask, ObjectiveVector)>> {
        if self.parallel {
            candidates.par_iter().map(|c| self.evaluate(c)).collect()
        } else {
            candidates.iter().map(|c| self.evaluate(c)).collect()
        }
    }

    pub fn evaluate_on_test(&self, mask: &FeatureMask) -> Result<ObjectiveVector> {
        evaluate_on_test(mask, self.ds, self.split, &self.cfg)
    }
}
