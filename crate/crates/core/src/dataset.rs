//! Loading, normalization, mean imputation and partitioning of incomplete
//! tabular datasets.
//!
//! The pipeline order is load, min-max normalize, impute, then split. Both
//! normalization and imputation statistics are taken over the full dataset,
//! before the train/test split.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::make_rng;

/// Where the class label sits in each CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    First,
    #[default]
    Last,
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" => Ok(LabelColumn::First),
            "last" => Ok(LabelColumn::Last),
            other => Err(Error::Config(format!(
                "label column must be `first` or `last`, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelColumn::First => "first",
            LabelColumn::Last => "last",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub missing_token: String,
    pub skip_header: bool,
    pub label_column: LabelColumn,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            missing_token: "?".to_string(),
            skip_header: false,
            label_column: LabelColumn::Last,
        }
    }
}

/// Parsed but not yet imputed table. Feature cells are `None` where missing;
/// labels are dense class ids in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub source_name: String,
    rows: Vec<Vec<Option<f64>>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl RawTable {
    /// Builds a table from already-parsed cells. Class names default to the
    /// decimal ids.
    pub fn new(
        source_name: impl Into<String>,
        rows: Vec<Vec<Option<f64>>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("table has no rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::Data("table has no feature columns".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Format {
                row: bad + 1,
                message: format!("expected {width} feature cells, found {}", rows[bad].len()),
            });
        }
        let class_count = labels.iter().max().map_or(0, |&m| m + 1);
        Ok(RawTable {
            source_name: source_name.into(),
            rows,
            labels,
            class_names: (0..class_count).map(|c| c.to_string()).collect(),
        })
    }

    pub fn instance_count(&self) -> usize {
        self.rows.len()
    }

    pub fn feature_count(&self) -> usize {
        self.rows[0].len()
    }

    /// Feature columns plus the label column.
    pub fn column_count(&self) -> usize {
        self.feature_count() + 1
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn profile(&self) -> MissingProfile {
        let mut per_feature = vec![0usize; self.feature_count()];
        for row in &self.rows {
            for (count, cell) in per_feature.iter_mut().zip(row) {
                if cell.is_none() {
                    *count += 1;
                }
            }
        }
        MissingProfile::new(per_feature, self.instance_count())
    }
}

/// Per-feature missing counts (`lm_j`) and their total (`la`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingProfile {
    per_feature: Vec<usize>,
    total: usize,
    instances: usize,
}

impl MissingProfile {
    pub fn new(per_feature: Vec<usize>, instances: usize) -> Self {
        let total = per_feature.iter().sum();
        MissingProfile {
            per_feature,
            total,
            instances,
        }
    }

    pub fn per_feature(&self) -> &[usize] {
        &self.per_feature
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn feature_count(&self) -> usize {
        self.per_feature.len()
    }

    /// `100 * la / (N * n)`, over feature cells only.
    pub fn missing_rate_pct(&self) -> f64 {
        100.0 * self.total as f64 / (self.instances * self.per_feature.len()) as f64
    }

    /// `100 * la / (N * (n + 1))`, counting the (never missing) label column
    /// in the denominator. This is the convention the published UCI summary
    /// tables use.
    pub fn missing_rate_pct_all_columns(&self) -> f64 {
        100.0 * self.total as f64 / (self.instances * (self.per_feature.len() + 1)) as f64
    }
}

/// Normalized, imputed dataset. Values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    instances: usize,
    features: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    missing_mask: Vec<bool>,
    profile: MissingProfile,
    class_count: usize,
}

impl Dataset {
    pub fn instance_count(&self) -> usize {
        self.instances
    }

    pub fn feature_count(&self) -> usize {
        self.features
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn profile(&self) -> &MissingProfile {
        &self.profile
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> usize {
        self.labels[row]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.features..(row + 1) * self.features]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.features + feature]
    }

    pub fn was_missing(&self, row: usize, feature: usize) -> bool {
        self.missing_mask[row * self.features + feature]
    }

    /// Back to a table with every cell present.
    pub fn to_raw(&self) -> RawTable {
        let rows = (0..self.instances)
            .map(|i| self.row(i).iter().map(|&v| Some(v)).collect())
            .collect();
        RawTable {
            source_name: self.name.clone(),
            rows,
            labels: self.labels.clone(),
            class_names: (0..self.class_count).map(|c| c.to_string()).collect(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<RawTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(&text, name, opts)
}

pub fn parse_csv(text: &str, source_name: impl Into<String>, opts: &CsvOptions) -> Result<RawTable> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;

    let lines = text.lines().enumerate().skip(usize::from(opts.skip_header));
    for (line_idx, line) in lines {
        let line_no = line_idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => {
                if cells.len() < 2 {
                    return Err(Error::Format {
                        row: line_no,
                        message: "need at least one feature and a label".into(),
                    });
                }
                width = Some(cells.len());
            }
            Some(w) if w != cells.len() => {
                return Err(Error::Format {
                    row: line_no,
                    message: format!("expected {w} cells, found {}", cells.len()),
                });
            }
            Some(_) => {}
        }

        let (label_token, feature_tokens, offset) = match opts.label_column {
            LabelColumn::First => (cells[0], &cells[1..], 1),
            LabelColumn::Last => (cells[cells.len() - 1], &cells[..cells.len() - 1], 0),
        };
        if label_token.is_empty() || label_token == opts.missing_token {
            return Err(Error::Data(format!("row {line_no}: class label is missing")));
        }
        let class_id = match class_names.iter().position(|c| c == label_token) {
            Some(id) => id,
            None => {
                class_names.push(label_token.to_string());
                class_names.len() - 1
            }
        };

        let mut row = Vec::with_capacity(feature_tokens.len());
        for (j, token) in feature_tokens.iter().enumerate() {
            if *token == opts.missing_token {
                row.push(None);
                continue;
            }
            let v: f64 = token.parse().map_err(|_| Error::Parse {
                row: line_no,
                column: j + offset + 1,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line_no,
                    column: j + offset + 1,
                    token: token.to_string(),
                });
            }
            row.push(Some(v));
        }
        rows.push(row);
        labels.push(class_id);
    }

    if rows.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    Ok(RawTable {
        source_name: source_name.into(),
        rows,
        labels,
        class_names,
    })
}

/// Min-max scales every feature column into `[0, 1]` using its observed
/// extremes. Constant columns become 0; missing cells stay missing.
pub fn normalize(mut table: RawTable) -> Result<RawTable> {
    for j in 0..table.feature_count() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &table.rows {
            if let Some(v) = row[j] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo > hi {
            return Err(Error::Data(format!(
                "feature column {} has no observed values",
                j + 1
            )));
        }
        let span = hi - lo;
        for row in &mut table.rows {
            if let Some(v) = row[j].as_mut() {
                *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            }
        }
    }
    Ok(table)
}

/// Replaces each missing cell of column `j` with the mean of the column's
/// observed values, `sum / (N - lm_j)`.
pub fn impute_mean(table: RawTable) -> Result<Dataset> {
    let n = table.feature_count();
    let big_n = table.instance_count();
    let profile = table.profile();

    let mut means = vec![0.0; n];
    for (j, mean) in means.iter_mut().enumerate() {
        let observed = big_n - profile.per_feature[j];
        if observed == 0 {
            return Err(Error::Data(format!(
                "feature column {} has no observed values",
                j + 1
            )));
        }
        let sum: f64 = table.rows.iter().filter_map(|r| r[j]).sum();
        *mean = sum / observed as f64;
    }

    let mut values = Vec::with_capacity(big_n * n);
    let mut missing_mask = Vec::with_capacity(big_n * n);
    for (i, row) in table.rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            match cell {
                Some(v) => {
                    if !(0.0..=1.0).contains(v) {
                        return Err(Error::Contract(format!(
                            "cell ({}, {}) = {v} lies outside [0, 1]; normalize first",
                            i + 1,
                            j + 1
                        )));
                    }
                    values.push(*v);
                    missing_mask.push(false);
                }
                None => {
                    values.push(means[j]);
                    missing_mask.push(true);
                }
            }
        }
    }

    Ok(Dataset {
        name: table.source_name,
        instances: big_n,
        features: n,
        values,
        labels: table.labels,
        missing_mask,
        profile,
        class_count: table.class_names.len(),
    })
}

/// `normalize` followed by `impute_mean`.
pub fn prepare(table: RawTable) -> Result<Dataset> {
    impute_mean(normalize(table)?)
}

/// Rounds half away from zero for non-negative inputs. A small slack absorbs
/// products such as `0.7 * 155` that land a few ulps below the half.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

/// Train/test partition plus cross-validation folds over the training rows.
/// `fold_of[i]` is the fold of `train[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub fold_of: Vec<usize>,
    pub folds: usize,
}

impl SplitSpec {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded random split. The first `round(train_fraction * N)` entries of a
/// shuffled index list form the training partition. Folds are dealt
/// class by class from one running counter, which stratifies where class
/// counts allow and keeps fold sizes within one of each other.
pub fn split(ds: &Dataset, seed: u64, train_fraction: f64, folds: usize) -> Result<SplitSpec> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    let big_n = ds.instance_count();
    let n_train = round_half_up(train_fraction * big_n as f64).min(big_n);
    if n_train < folds {
        return Err(Error::Config(format!(
            "{n_train} training instances cannot fill {folds} folds"
        )));
    }

    let mut rng = make_rng(seed);
    let order = rng.permutation(big_n);
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();

    // Visit training rows grouped by class, in shuffled order within a class.
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.class_count()];
    for &pos in &rng.permutation(n_train) {
        by_class[ds.label(train[pos])].push(pos);
    }
    let mut fold_of = vec![0; n_train];
    let mut counter = 0;
    for members in &by_class {
        for &pos in members {
            fold_of[pos] = counter % folds;
            counter += 1;
        }
    }

    Ok(SplitSpec {
        train,
        test,
        fold_of,
        folds,
    })
}

/// Table-I style profile of a loaded file.
#[derive(Debug, Clone)]
pub struct ProfileReport {
    pub name: String,
    pub instances: usize,
    pub columns: usize,
    pub features: usize,
    pub classes: usize,
    pub profile: MissingProfile,
}

impl ProfileReport {
    pub fn of(table: &RawTable) -> Self {
        ProfileReport {
            name: table.source_name.clone(),
            instances: table.instance_count(),
            columns: table.column_count(),
            features: table.feature_count(),
            classes: table.class_count(),
            profile: table.profile(),
        }
    }
}

impl fmt::Display for ProfileReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dataset: {}", self.name)?;
        writeln!(f, "instances (N): {}", self.instances)?;
        writeln!(f, "columns (incl. label): {}", self.columns)?;
        writeln!(f, "features (n): {}", self.features)?;
        writeln!(f, "classes: {}", self.classes)?;
        let lm: Vec<String> = self.profile.per_feature().iter().map(|c| c.to_string()).collect();
        writeln!(f, "missing per feature (lm_j): {}", lm.join(","))?;
        writeln!(f, "missing total (la): {}", self.profile.total())?;
        writeln!(
            f,
            "missing rate over features: {:.2}%",
            self.profile.missing_rate_pct()
        )?;
        write!(
            f,
            "missing rate over all columns: {:.2}%",
            self.profile.missing_rate_pct_all_columns()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[Option<f64>]) -> RawTable {
        let rows = values.iter().map(|v| vec![*v]).collect();
        RawTable::new("col", rows, vec![0; values.len()]).unwrap()
    }

    fn first_column(table: &RawTable) -> Vec<Option<f64>> {
        table.rows().iter().map(|r| r[0]).collect()
    }

    #[test]
    fn missing_token_becomes_empty() {
        let t = parse_csv("63,1,?,145,1\n", "x", &CsvOptions::default()).unwrap();
        assert_eq!(t.feature_count(), 4);
        assert_eq!(t.rows()[0], vec![Some(63.0), Some(1.0), None, Some(145.0)]);
        assert_eq!(t.labels(), &[0]);
        assert_eq!(t.class_names(), &["1".to_string()]);
    }

    #[test]
    fn labels_are_dense_in_first_appearance_order() {
        let text = "1,b\n2,a\n3,b\n4,c\n";
        let t = parse_csv(text, "x", &CsvOptions::default()).unwrap();
        assert_eq!(t.labels(), &[0, 1, 0, 2]);
        assert_eq!(t.class_count(), 3);
    }

    #[test]
    fn label_first_layout() {
        let opts = CsvOptions {
            label_column: LabelColumn::First,
            ..CsvOptions::default()
        };
        let t = parse_csv("2,30,?\n1,50,1.5\n", "x", &opts).unwrap();
        assert_eq!(t.feature_count(), 2);
        assert_eq!(t.rows()[0], vec![Some(30.0), None]);
        assert_eq!(t.class_names(), &["2".to_string(), "1".to_string()]);
    }

    #[test]
    fn header_skip() {
        let opts = CsvOptions {
            skip_header: true,
            ..CsvOptions::default()
        };
        let t = parse_csv("a,b,class\n1,2,x\n", "x", &opts).unwrap();
        assert_eq!(t.instance_count(), 1);
    }

    #[test]
    fn ragged_row_names_row() {
        let err = parse_csv("1,2,0\n1,0\n", "x", &CsvOptions::default()).unwrap_err();
        match err {
            Error::Format { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_feature_is_parse_error() {
        let err = parse_csv("1,abc,0\n", "x", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, column: 2, .. }));
    }

    #[test]
    fn missing_label_is_data_error() {
        let err = parse_csv("1,2,?\n", "x", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn normalize_examples() {
        let t = normalize(column(&[Some(2.0), Some(4.0), Some(6.0)])).unwrap();
        assert_eq!(first_column(&t), vec![Some(0.0), Some(0.5), Some(1.0)]);

        let t = normalize(column(&[Some(5.0), Some(5.0), Some(5.0)])).unwrap();
        assert_eq!(first_column(&t), vec![Some(0.0); 3]);

        let t = normalize(column(&[Some(1.0), None, Some(3.0)])).unwrap();
        assert_eq!(first_column(&t), vec![Some(0.0), None, Some(1.0)]);
    }

    #[test]
    fn fully_missing_column_rejected() {
        let t = RawTable::new(
            "x",
            vec![vec![Some(1.0), None], vec![Some(2.0), None]],
            vec![0, 1],
        )
        .unwrap();
        let err = normalize(t).unwrap_err();
        assert!(err.to_string().contains("column 2"), "{err}");
    }

    #[test]
    fn impute_two_value_mean() {
        let ds = impute_mean(column(&[Some(0.2), None, Some(0.6)])).unwrap();
        assert!((ds.value(1, 0) - 0.4).abs() < 1e-15);
        assert_eq!(ds.value(0, 0), 0.2);
        assert_eq!(ds.value(2, 0), 0.6);
        assert!(ds.was_missing(1, 0));
        assert_eq!(ds.profile().per_feature(), &[1]);
        assert_eq!(ds.profile().total(), 1);
    }

    #[test]
    fn impute_complete_column_unchanged() {
        let ds = impute_mean(column(&[Some(0.1), Some(0.3), Some(0.8)])).unwrap();
        let vals: Vec<f64> = (0..3).map(|i| ds.value(i, 0)).collect();
        assert_eq!(vals, vec![0.1, 0.3, 0.8]);
        assert_eq!(ds.profile().total(), 0);
    }

    #[test]
    fn impute_rejects_unnormalized() {
        let err = impute_mean(column(&[Some(3.0), None])).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(round_half_up(0.7 * 10.0), 7);
        assert_eq!(round_half_up(0.7 * 155.0), 109);
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.4999), 2);
    }

    fn toy_dataset(n: usize, classes: usize) -> Dataset {
        let rows = (0..n).map(|i| vec![Some(i as f64 / n as f64)]).collect();
        let labels = (0..n).map(|i| i % classes).collect();
        impute_mean(RawTable::new("toy", rows, labels).unwrap()).unwrap()
    }

    #[test]
    fn split_sizes() {
        let ds = toy_dataset(10, 2);
        let s = split(&ds, 1, 0.7, 2).unwrap();
        assert_eq!(s.train.len(), 7);
        assert_eq!(s.test.len(), 3);

        let ds = toy_dataset(155, 2);
        let s = split(&ds, 1, 0.7, 10).unwrap();
        assert_eq!(s.train.len(), 109);
        assert_eq!(s.test.len(), 46);
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let ds = toy_dataset(57, 3);
        let a = split(&ds, 99, 0.7, 10).unwrap();
        let b = split(&ds, 99, 0.7, 10).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..57).collect::<Vec<_>>());
        let sizes = a.fold_sizes();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(hi - lo <= 1, "{sizes:?}");
    }

    #[test]
    fn split_config_errors() {
        let ds = toy_dataset(10, 2);
        assert!(matches!(split(&ds, 1, 0.7, 8), Err(Error::Config(_))));
        assert!(matches!(split(&ds, 1, 1.0, 2), Err(Error::Config(_))));
        assert!(matches!(split(&ds, 1, 0.7, 1), Err(Error::Config(_))));
    }

    #[test]
    fn stratified_folds_balance_classes() {
        let ds = toy_dataset(100, 2);
        let s = split(&ds, 5, 0.7, 5).unwrap();
        for f in 0..5 {
            let counts: Vec<usize> = (0..2)
                .map(|c| {
                    s.train
                        .iter()
                        .zip(&s.fold_of)
                        .filter(|&(&r, &fold)| fold == f && ds.label(r) == c)
                        .count()
                })
                .collect();
            let total_c: Vec<usize> = (0..2)
                .map(|c| s.train.iter().filter(|&&r| ds.label(r) == c).count())
                .collect();
            for c in 0..2 {
                let ideal = total_c[c] as f64 / 5.0;
                assert!((counts[c] as f64 - ideal).abs() <= 1.0, "{counts:?} {total_c:?}");
            }
        }
    }

    #[test]
    fn profile_rates() {
        let p = MissingProfile::new(vec![3, 1, 0, 4], 10);
        assert_eq!(p.total(), 8);
        assert!((p.missing_rate_pct() - 20.0).abs() < 1e-12);
        assert!((p.missing_rate_pct_all_columns() - 16.0).abs() < 1e-12);
    }
}
