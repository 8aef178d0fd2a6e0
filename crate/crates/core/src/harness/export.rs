//! Plot-ready front CSVs: per (dataset, algorithm, split) and one combined
//! file per (dataset, split) with a leading `algorithm` column.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::record::{sort_points, FrontPoint, RunRecord, Split, FRONT_HEADER};
use crate::error::{Error, Result};
use crate::evo::dominates;
use crate::objectives::FeatureMask;

/// Pools the points of all runs, drops duplicate masks and keeps the
/// non-dominated ones, sorted by f1, f2, f3, then mask.
pub fn pooled_front<'a>(records: impl IntoIterator<Item = &'a RunRecord>, split: Split) -> Vec<FrontPoint> {
    let mut unique: BTreeMap<FeatureMask, FrontPoint> = BTreeMap::new();
    for r in records {
        for p in r.points(split) {
            unique.entry(p.mask.clone()).or_insert_with(|| p.clone());
        }
    }
    let all: Vec<FrontPoint> = unique.into_values().collect();
    let objs: Vec<[f64; 3]> = all.iter().map(FrontPoint::objective_array).collect();
    let mut front: Vec<FrontPoint> = all
        .iter()
        .enumerate()
        .filter(|(i, _)| !objs.iter().any(|o| dominates(o, &objs[*i])))
        .map(|(_, p)| p.clone())
        .collect();
    sort_points(&mut front);
    front
}

/// Writes `fronts/<dataset>__<algorithm>__<split>.csv` and
/// `fronts/<dataset>__<split>__all.csv` under `out_dir`; returns the paths.
pub fn export_fronts(records: &[RunRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Data("no run records to export".into()));
    }
    let dir = out_dir.join("fronts");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut cells: BTreeMap<(&str, &str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((&r.dataset, &r.algorithm)).or_default().push(r);
    }
    let datasets: BTreeSet<&str> = cells.keys().map(|k| k.0).collect();

    let mut written = Vec::new();
    for ds in datasets {
        for split in Split::BOTH {
            let mut combined = format!("algorithm,{FRONT_HEADER}\n");
            for ((_, algorithm), recs) in cells.range((ds, "")..).take_while(|((d, _), _)| *d == ds) {
                let front = pooled_front(recs.iter().copied(), split);
                let mut text = format!("{FRONT_HEADER}\n");
                for p in &front {
                    let row = p.to_csv_row();
                    text.push_str(&row);
                    text.push('\n');
                    combined.push_str(&format!("{algorithm},{row}\n"));
                }
                let path = dir.join(format!("{ds}__{algorithm}__{split}.csv"));
                fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
            let path = dir.join(format!("{ds}__{split}__all.csv"));
            fs::write(&path, combined).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::ObjectiveVector;

    fn pt(e: f64, s: usize, m: f64, mask: &str) -> FrontPoint {
        FrontPoint {
            objectives: ObjectiveVector {
                error_rate: e,
                size: s,
                missing_rate_pct: m,
            },
            mask: FeatureMask::parse(mask).unwrap(),
        }
    }

    fn rec(algorithm: &str, run: usize, pts: Vec<FrontPoint>) -> RunRecord {
        RunRecord {
            dataset: "toy".into(),
            algorithm: algorithm.into(),
            run,
            seed: 0,
            features: 4,
            evaluations: 10,
            wall_time: None,
            train: pts.clone(),
            test: pts,
        }
    }

    #[test]
    fn single_point_row() {
        let tmp = tempfile::tempdir().unwrap();
        let r = rec("nsga3", 0, vec![pt(0.2, 3, 10.0, "1110")]);
        export_fronts(&[r], tmp.path()).unwrap();
        let text = fs::read_to_string(tmp.path().join("fronts/toy__nsga3__train.csv")).unwrap();
        assert_eq!(text, "f1_error,f2_size,f3_missing_pct,mask\n0.2,3,10.0,1110\n");
        let all = fs::read_to_string(tmp.path().join("fronts/toy__train__all.csv")).unwrap();
        assert_eq!(all, "algorithm,f1_error,f2_size,f3_missing_pct,mask\nnsga3,0.2,3,10.0,1110\n");
    }

    #[test]
    fn pooling_sorts_and_filters() {
        let a = rec("nsga3", 0, vec![pt(0.3, 1, 0.0, "1000"), pt(0.4, 2, 5.0, "1100")]);
        let b = rec("nsga3", 1, vec![pt(0.1, 3, 20.0, "1110"), pt(0.3, 1, 0.0, "1000")]);
        let front = pooled_front([&a, &b], Split::Train);
        let rows: Vec<String> = front.iter().map(FrontPoint::to_csv_row).collect();
        assert_eq!(rows, vec!["0.1,3,20.0,1110", "0.3,1,0.0,1000"]);
    }
}
