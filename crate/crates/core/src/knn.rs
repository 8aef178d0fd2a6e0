//! Brute-force K-nearest-neighbor classification and l-fold cross-validated
//! accuracy over a subset of feature columns.
//!
//! Distances are Euclidean (compared squared). Neighbors at equal distance
//! are ordered by the lower training-row index; a tied vote goes to the
//! lower class id. Results are therefore fully deterministic.

use std::cmp::Ordering;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::objectives::FeatureMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnConfig {
    pub k: usize,
    pub folds: usize,
}

impl KnnConfig {
    pub fn new(k: usize, folds: usize) -> Result<Self> {
        let cfg = KnnConfig { k, folds };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("need at least 2 folds".into()));
        }
        Ok(())
    }
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5, folds: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyResult {
    pub mean_accuracy: f64,
    pub per_fold: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Neighbor {
    dist: f64,
    row: usize,
}

fn closer(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.dist.total_cmp(&b.dist).then(a.row.cmp(&b.row))
}

/// Majority label among the `k` closest entries of `candidates`. Reorders
/// `candidates`.
fn vote(candidates: &mut [Neighbor], labels: impl Fn(usize) -> usize, k: usize, counts: &mut [usize]) -> usize {
    let k = k.min(candidates.len());
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, closer);
    }
    counts.iter_mut().for_each(|c| *c = 0);
    for nb in &candidates[..k] {
        counts[labels(nb.row)] += 1;
    }
    let mut best = 0;
    for (class, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = class;
        }
    }
    best
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Classifies `query` against explicit training rows.
pub fn knn_predict(train_rows: &[Vec<f64>], train_labels: &[usize], query: &[f64], k: usize) -> Result<usize> {
    if train_rows.is_empty() {
        return Err(Error::Evaluation("empty training set".into()));
    }
    if train_rows.len() != train_labels.len() {
        return Err(Error::Contract("training rows and labels differ in length".into()));
    }
    if k == 0 || k > train_rows.len() {
        return Err(Error::Config(format!(
            "k = {k} but only {} training rows",
            train_rows.len()
        )));
    }
    if let Some(bad) = train_rows.iter().position(|r| r.len() != query.len()) {
        return Err(Error::Contract(format!(
            "training row {bad} has dimension {}, query has {}",
            train_rows[bad].len(),
            query.len()
        )));
    }
    let mut candidates: Vec<Neighbor> = train_rows
        .iter()
        .enumerate()
        .map(|(row, r)| Neighbor {
            dist: squared_distance(r, query),
            row,
        })
        .collect();
    let classes = train_labels.iter().max().map_or(1, |&m| m + 1);
    let mut counts = vec![0; classes];
    Ok(vote(&mut candidates, |r| train_labels[r], k, &mut counts))
}

/// Selected columns of `rows`, packed row-major.
struct Packed {
    dim: usize,
    values: Vec<f64>,
}

impl Packed {
    fn new(ds: &Dataset, rows: &[usize], columns: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * columns.len());
        for &r in rows {
            let row = ds.row(r);
            values.extend(columns.iter().map(|&c| row[c]));
        }
        Packed {
            dim: columns.len(),
            values,
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

fn selected_columns(ds: &Dataset, mask: &FeatureMask) -> Result<Vec<usize>> {
    if mask.len() != ds.feature_count() {
        return Err(Error::Contract(format!(
            "mask has {} bits, dataset has {} features",
            mask.len(),
            ds.feature_count()
        )));
    }
    let cols = mask.selected_indices();
    if cols.is_empty() {
        return Err(Error::Contract("feature mask selects no features".into()));
    }
    Ok(cols)
}

/// l-fold cross-validated accuracy on `rows`, where `fold_of[i]` is the fold
/// of `rows[i]`. Each fold is classified against all other folds; the
/// result is the mean of the per-fold accuracies.
pub fn cross_validated_accuracy(
    ds: &Dataset,
    rows: &[usize],
    mask: &FeatureMask,
    fold_of: &[usize],
    cfg: &KnnConfig,
) -> Result<AccuracyResult> {
    cfg.validate()?;
    if rows.len() != fold_of.len() {
        return Err(Error::Contract("rows and fold assignment differ in length".into()));
    }
    let columns = selected_columns(ds, mask)?;

    let mut fold_sizes = vec![0usize; cfg.folds];
    for &f in fold_of {
        if f >= cfg.folds {
            return Err(Error::Contract(format!("fold id {f} out of range")));
        }
        fold_sizes[f] += 1;
    }
    if let Some(empty) = fold_sizes.iter().position(|&s| s == 0) {
        return Err(Error::Contract(format!("fold {empty} is empty")));
    }
    let smallest_training = rows.len() - fold_sizes.iter().max().copied().unwrap_or(0);
    if cfg.k > smallest_training {
        return Err(Error::Config(format!(
            "k = {} exceeds the smallest training fold ({smallest_training} rows)",
            cfg.k
        )));
    }

    let packed = Packed::new(ds, rows, &columns);
    let mut counts = vec![0; ds.class_count().max(1)];
    let mut candidates = Vec::with_capacity(rows.len());
    let mut correct = vec![0usize; cfg.folds];
    for (qi, &qf) in fold_of.iter().enumerate() {
        candidates.clear();
        let query = packed.row(qi);
        for (ti, &tf) in fold_of.iter().enumerate() {
            if tf != qf {
                candidates.push(Neighbor {
                    dist: squared_distance(packed.row(ti), query),
                    row: rows[ti],
                });
            }
        }
        let predicted = vote(&mut candidates, |r| ds.label(r), cfg.k, &mut counts);
        if predicted == ds.label(rows[qi]) {
            correct[qf] += 1;
        }
    }

    let per_fold: Vec<f64> = correct
        .iter()
        .zip(&fold_sizes)
        .map(|(&c, &s)| c as f64 / s as f64)
        .collect();
    let mean_accuracy = per_fold.iter().sum::<f64>() / cfg.folds as f64;
    Ok(AccuracyResult {
        mean_accuracy,
        per_fold,
    })
}

/// Predicts every row of `queries` from the whole of `train` (no folds).
pub fn predict_rows(
    ds: &Dataset,
    train: &[usize],
    queries: &[usize],
    mask: &FeatureMask,
    k: usize,
) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::Evaluation("empty training set".into()));
    }
    if k == 0 || k > train.len() {
        return Err(Error::Config(format!(
            "k = {k} but only {} training rows",
            train.len()
        )));
    }
    let columns = selected_columns(ds, mask)?;
    let packed = Packed::new(ds, train, &columns);
    let mut counts = vec![0; ds.class_count().max(1)];
    let mut candidates = Vec::with_capacity(train.len());
    let mut query = Vec::with_capacity(columns.len());
    let mut out = Vec::with_capacity(queries.len());
    for &q in queries {
        let row = ds.row(q);
        query.clear();
        query.extend(columns.iter().map(|&c| row[c]));
        candidates.clear();
        candidates.extend(train.iter().enumerate().map(|(ti, &r)| Neighbor {
            dist: squared_distance(packed.row(ti), &query),
            row: r,
        }));
        out.push(vote(&mut candidates, |r| ds.label(r), k, &mut counts));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{impute_mean, RawTable};

    fn rows(v: &[&[f64]]) -> Vec<Vec<f64>> {
        v.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn exact_match_wins_with_k1() {
        let train = rows(&[&[0.0, 0.0], &[0.5, 0.5], &[1.0, 1.0]]);
        let labels = [2, 0, 1];
        assert_eq!(knn_predict(&train, &labels, &[0.5, 0.5], 1).unwrap(), 0);
        assert_eq!(knn_predict(&train, &labels, &[1.0, 1.0], 1).unwrap(), 1);
    }

    #[test]
    fn majority_vote() {
        let train = rows(&[&[0.0], &[0.1], &[0.2], &[0.9]]);
        // A = 1, B = 0
        let labels = [1, 1, 0, 0];
        assert_eq!(knn_predict(&train, &labels, &[0.05], 3).unwrap(), 1);
    }

    #[test]
    fn vote_tie_goes_to_lower_class() {
        let train = rows(&[&[0.0], &[0.2]]);
        assert_eq!(knn_predict(&train, &[1, 0], &[0.1], 2).unwrap(), 0);
        assert_eq!(knn_predict(&train, &[0, 1], &[0.1], 2).unwrap(), 0);
    }

    #[test]
    fn distance_tie_goes_to_lower_row() {
        let train = rows(&[&[0.0], &[0.2], &[0.2]]);
        // Row 1 and 2 tie at distance 0.1; row 1 wins.
        assert_eq!(knn_predict(&train, &[0, 3, 2], &[0.1 + 0.05], 1).unwrap(), 3);
    }

    #[test]
    fn predict_errors() {
        assert!(matches!(knn_predict(&[], &[], &[0.0], 1), Err(Error::Evaluation(_))));
        let train = rows(&[&[0.0, 1.0]]);
        assert!(matches!(knn_predict(&train, &[0], &[0.0], 1), Err(Error::Contract(_))));
        assert!(matches!(knn_predict(&train, &[0], &[0.0, 1.0], 2), Err(Error::Config(_))));
    }

    fn dataset(cells: &[f64], labels: &[usize]) -> Dataset {
        let rows = cells.iter().map(|&v| vec![Some(v)]).collect();
        impute_mean(RawTable::new("t", rows, labels.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn duplicated_folds_classify_perfectly() {
        let ds = dataset(&[0.1, 0.4, 0.9, 0.1, 0.4, 0.9], &[0, 1, 2, 0, 1, 2]);
        let rows: Vec<usize> = (0..6).collect();
        let folds = [0, 0, 0, 1, 1, 1];
        let mask = FeatureMask::from_bits(vec![true]);
        let r = cross_validated_accuracy(&ds, &rows, &mask, &folds, &KnnConfig { k: 1, folds: 2 }).unwrap();
        assert_eq!(r.mean_accuracy, 1.0);
        assert_eq!(r.per_fold, vec![1.0, 1.0]);
    }

    #[test]
    fn constant_feature_is_deterministic() {
        let ds = dataset(&[0.0; 8], &[0, 1, 0, 1, 0, 1, 0, 1]);
        let rows: Vec<usize> = (0..8).collect();
        let folds = [0, 1, 0, 1, 0, 1, 0, 1];
        let mask = FeatureMask::from_bits(vec![true]);
        let cfg = KnnConfig { k: 1, folds: 2 };
        let a = cross_validated_accuracy(&ds, &rows, &mask, &folds, &cfg).unwrap();
        for _ in 0..5 {
            assert_eq!(cross_validated_accuracy(&ds, &rows, &mask, &folds, &cfg).unwrap(), a);
        }
        // Fold 0 holds class 0 only; its nearest (lowest-index) neighbor in
        // fold 1 is row 1, class 1. Everything is misclassified.
        assert_eq!(a.mean_accuracy, 0.0);
    }

    #[test]
    fn cv_errors() {
        let ds = dataset(&[0.1, 0.2, 0.3, 0.4], &[0, 1, 0, 1]);
        let rows: Vec<usize> = (0..4).collect();
        let empty = FeatureMask::from_bits(vec![false]);
        let full = FeatureMask::from_bits(vec![true]);
        let cfg = KnnConfig { k: 1, folds: 2 };
        assert!(matches!(
            cross_validated_accuracy(&ds, &rows, &empty, &[0, 1, 0, 1], &cfg),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            cross_validated_accuracy(&ds, &rows, &full, &[0, 0, 0, 0], &cfg),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            cross_validated_accuracy(&ds, &rows, &full, &[0, 1, 0, 1], &KnnConfig { k: 3, folds: 2 }),
            Err(Error::Config(_))
        ));
    }
}
