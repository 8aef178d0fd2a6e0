//! MV/SD/significance tables over run records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use super::format_f64;
use super::record::{RunRecord, Split};
use crate::error::{Error, Result};
use crate::metrics::{
    build_reference_set, hypervolume_3d, igd, mean, sample_sd, welch_t_test, HvConfig, Orientation, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Igd,
    Hv,
}

impl Metric {
    pub const BOTH: [Metric; 2] = [Metric::Igd, Metric::Hv];

    pub fn id(&self) -> &'static str {
        match self {
            Metric::Igd => "IGD",
            Metric::Hv => "HV",
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            Metric::Igd => Orientation::LowerIsBetter,
            Metric::Hv => Orientation::HigherIsBetter,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub split: Split,
    pub metric: Metric,
    pub algorithm: String,
    /// Per-run values, in run order.
    pub values: Vec<f64>,
    pub mean: f64,
    /// Absent for single-run cells.
    pub sd: Option<f64>,
    /// Welch verdict of the reference algorithm against this one. Absent on
    /// the reference row itself and when it cannot be computed.
    pub mark: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub reference_algorithm: String,
    /// Ordered by (dataset, split, metric, algorithm).
    pub rows: Vec<SummaryRow>,
    /// Scaled (objectives divided by (1, n, 100)) reference sets used for
    /// IGD, keyed by (dataset, split).
    pub reference_sets: BTreeMap<(String, Split), Vec<[f64; 3]>>,
    pub notices: Vec<String>,
}

/// Computes IGD and HV for every record and split, then aggregates per
/// (dataset, split, metric, algorithm). Both indicators are measured on
/// objectives scaled by (1, n, 100); the IGD reference set is the
/// non-dominated union of all runs of all algorithms for that dataset and
/// split.
pub fn summarize(records: &[RunRecord], reference_algorithm: &str) -> Result<SummaryTable> {
    if records.is_empty() {
        return Err(Error::Data("no run records to summarize".into()));
    }
    let mut by_dataset: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_dataset.entry(&r.dataset).or_default().push(r);
    }

    let mut table = SummaryTable {
        reference_algorithm: reference_algorithm.to_string(),
        rows: Vec::new(),
        reference_sets: BTreeMap::new(),
        notices: Vec::new(),
    };

    for (dataset, mut recs) in by_dataset {
        recs.sort_by(|a, b| (&a.algorithm, a.run).cmp(&(&b.algorithm, b.run)));
        let features: BTreeSet<usize> = recs.iter().map(|r| r.features).collect();
        if features.len() != 1 {
            return Err(Error::Data(format!("records of {dataset} disagree on the feature count")));
        }
        let hv_cfg = HvConfig::for_features(*features.iter().next().unwrap());
        let algorithms: BTreeSet<&str> = recs.iter().map(|r| r.algorithm.as_str()).collect();
        if !algorithms.contains(reference_algorithm) {
            table.notices.push(format!(
                "{dataset}: reference algorithm {reference_algorithm} has no runs; marks omitted"
            ));
        }

        for split in Split::BOTH {
            let scaled: Vec<Vec<[f64; 3]>> = recs
                .iter()
                .map(|r| r.points(split).iter().map(|p| hv_cfg.scale(&p.objective_array())).collect())
                .collect();
            let reference_set = build_reference_set(&scaled);
            let unit = HvConfig {
                reference: hv_cfg.reference,
                divisors: [1.0; 3],
            };

            let mut values: BTreeMap<(Metric, &str), Vec<f64>> = BTreeMap::new();
            for (r, front) in recs.iter().zip(&scaled) {
                let igd_value = if front.is_empty() {
                    f64::INFINITY
                } else {
                    igd(front, &reference_set)?
                };
                values.entry((Metric::Igd, &r.algorithm)).or_default().push(igd_value);
                values
                    .entry((Metric::Hv, &r.algorithm))
                    .or_default()
                    .push(hypervolume_3d(front, &unit));
            }

            for metric in Metric::BOTH {
                let reference_values = values.get(&(metric, reference_algorithm));
                for &algorithm in &algorithms {
                    let vals = values[&(metric, algorithm)].clone();
                    let sd = (vals.len() >= 2).then(|| sample_sd(&vals));
                    if vals.len() < 2 {
                        table.notices.push(format!(
                            "{dataset}/{split}/{metric}/{algorithm}: single run, SD and mark omitted"
                        ));
                    }
                    let mark = match reference_values {
                        Some(refv) if algorithm != reference_algorithm && refv.len() >= 2 && vals.len() >= 2 => {
                            match welch_t_test(refv, &vals, metric.orientation()) {
                                Ok(t) => Some(t.verdict),
                                Err(e) => {
                                    table
                                        .notices
                                        .push(format!("{dataset}/{split}/{metric}/{algorithm}: no mark ({e})"));
                                    None
                                }
                            }
                        }
                        _ => None,
                    };
                    table.rows.push(SummaryRow {
                        dataset: dataset.to_string(),
                        split,
                        metric,
                        algorithm: algorithm.to_string(),
                        mean: mean(&vals),
                        values: vals,
                        sd,
                        mark,
                    });
                }
            }
            table.reference_sets.insert((dataset.to_string(), split), reference_set);
        }
    }
    Ok(table)
}

impl SummaryTable {
    pub fn row(&self, dataset: &str, split: Split, metric: Metric, algorithm: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.split == split && r.metric == metric && r.algorithm == algorithm)
    }

    pub fn datasets(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.dataset.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn algorithms(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.algorithm.as_str()).collect();
        set.into_iter().collect()
    }

    /// Datasets on which `a`'s mean HV is not significantly below `b`'s, out
    /// of the datasets where both ran. Uses the Welch mark when `a` is the
    /// reference algorithm, and mean comparison otherwise.
    pub fn hv_not_worse(&self, a: &str, b: &str, split: Split) -> (usize, usize) {
        let mut wins = 0;
        let mut total = 0;
        for ds in self.datasets() {
            let (Some(ra), Some(rb)) = (self.row(ds, split, Metric::Hv, a), self.row(ds, split, Metric::Hv, b)) else {
                continue;
            };
            total += 1;
            let not_worse = match (a == self.reference_algorithm, rb.mark) {
                (true, Some(mark)) => mark != Verdict::Worse,
                _ => ra.mean >= rb.mean,
            };
            wins += usize::from(not_worse);
        }
        (wins, total)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("dataset,split,metric,algorithm,runs,mv,sd,mark\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.dataset,
                r.split,
                r.metric,
                r.algorithm,
                r.values.len(),
                format_f64(r.mean),
                r.sd.map(format_f64).unwrap_or_default(),
                r.mark.map(|m| m.symbol()).unwrap_or_default()
            ));
        }
        s
    }

    /// One line per (dataset, split, metric); one MV/SD/mark group per
    /// algorithm, reference algorithm first.
    pub fn to_text(&self) -> String {
        let mut algorithms = self.algorithms();
        algorithms.sort_by_key(|a| (*a != self.reference_algorithm, *a));

        let mut header = vec!["dataset".to_string(), "split".into(), "metric".into()];
        for a in &algorithms {
            header.push(format!("{a} MV"));
            header.push(format!("{a} SD"));
            header.push("T".into());
        }
        let mut lines = vec![header];
        for ds in self.datasets() {
            for split in Split::BOTH {
                for metric in Metric::BOTH {
                    let mut line = vec![ds.to_string(), split.to_string(), metric.to_string()];
                    for a in &algorithms {
                        match self.row(ds, split, metric, a) {
                            Some(r) => {
                                line.push(format!("{:.4e}", r.mean));
                                line.push(r.sd.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into()));
                                line.push(r.mark.map(|m| m.symbol().to_string()).unwrap_or_default());
                            }
                            None => line.extend(["n/a".into(), "".into(), "".into()]),
                        }
                    }
                    lines.push(line);
                }
            }
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut s = String::new();
        for l in &lines {
            let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
        }
        s.push_str(&format!(
            "T: Welch t-test (5%) of {} against each algorithm: + better, - worse, = similar\n",
            self.reference_algorithm
        ));
        for n in &self.notices {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }

    /// Writes `summary.txt`, `summary.csv` and `reference_sets/*.csv`.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let refs_dir = out_dir.join("reference_sets");
        fs::create_dir_all(&refs_dir).map_err(|e| Error::io(&refs_dir, e))?;
        let write = |path: &Path, text: String| fs::write(path, text).map_err(|e| Error::io(path, e));
        write(&out_dir.join("summary.txt"), self.to_text())?;
        write(&out_dir.join("summary.csv"), self.to_csv())?;
        for ((ds, split), points) in &self.reference_sets {
            let mut s = String::from("f1_error,f2_scaled,f3_scaled\n");
            for p in points {
                s.push_str(&format!("{},{},{}\n", format_f64(p[0]), format_f64(p[1]), format_f64(p[2])));
            }
            write(&refs_dir.join(format!("{ds}__{split}.csv")), s)?;
        }
        Ok(())
    }
}
