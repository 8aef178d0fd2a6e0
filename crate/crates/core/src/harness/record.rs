//! Per-run record files.
//!
//! ```text
//! fsmiss-record 1
//! dataset=hepatitis
//! algorithm=nsga3
//! run=0
//! seed=1
//! features=19
//! evaluations=4000
//! [train]
//! f1_error,f2_size,f3_missing_pct,mask
//! 0.1,3,10.0,0010000000000000011
//! [test]
//! f1_error,f2_size,f3_missing_pct,mask
//! ...
//! ```
//!
//! Wall-clock time is not part of the record (records are byte-for-byte
//! reproducible); it goes to the `timings.csv` sidecar.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::format_f64;
use crate::error::{Error, Result};
use crate::objectives::{FeatureMask, ObjectiveVector};

pub const RECORD_MAGIC: &str = "fsmiss-record 1";
pub const FRONT_HEADER: &str = "f1_error,f2_size,f3_missing_pct,mask";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub const BOTH: [Split; 2] = [Split::Train, Split::Test];

    pub fn id(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub objectives: ObjectiveVector,
    pub mask: FeatureMask,
}

impl FrontPoint {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            format_f64(self.objectives.error_rate),
            self.objectives.size,
            format_f64(self.objectives.missing_rate_pct),
            self.mask
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.split(',').collect();
        let bad = || Error::Data(format!("malformed front row {line:?}"));
        if cells.len() != 4 {
            return Err(bad());
        }
        Ok(FrontPoint {
            objectives: ObjectiveVector {
                error_rate: cells[0].parse().map_err(|_| bad())?,
                size: cells[1].parse().map_err(|_| bad())?,
                missing_rate_pct: cells[2].parse().map_err(|_| bad())?,
            },
            mask: FeatureMask::parse(cells[3])?,
        })
    }

    pub fn objective_array(&self) -> [f64; 3] {
        self.objectives.to_array()
    }
}

/// Orders by f1, then f2, then f3, then mask.
pub fn sort_points(points: &mut [FrontPoint]) {
    points.sort_by(|a, b| {
        let (x, y) = (a.objective_array(), b.objective_array());
        x[0].total_cmp(&y[0])
            .then(x[1].total_cmp(&y[1]))
            .then(x[2].total_cmp(&y[2]))
            .then(a.mask.cmp(&b.mask))
    });
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub algorithm: String,
    pub run: usize,
    pub seed: u64,
    pub features: usize,
    pub evaluations: usize,
    pub wall_time: Option<Duration>,
    /// Rank-1 masks with their training (cross-validated) objectives.
    pub train: Vec<FrontPoint>,
    /// The same masks, row for row, evaluated on the test partition.
    pub test: Vec<FrontPoint>,
}

impl RunRecord {
    pub fn points(&self, split: Split) -> &[FrontPoint] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}__{}__run{:04}.txt", self.dataset, self.algorithm, self.run)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(RECORD_MAGIC);
        s.push('\n');
        s.push_str(&format!("dataset={}\n", self.dataset));
        s.push_str(&format!("algorithm={}\n", self.algorithm));
        s.push_str(&format!("run={}\n", self.run));
        s.push_str(&format!("seed={}\n", self.seed));
        s.push_str(&format!("features={}\n", self.features));
        s.push_str(&format!("evaluations={}\n", self.evaluations));
        for split in Split::BOTH {
            s.push_str(&format!("[{split}]\n{FRONT_HEADER}\n"));
            for p in self.points(split) {
                s.push_str(&p.to_csv_row());
                s.push('\n');
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(RECORD_MAGIC) {
            return Err(Error::Data("not a run record".into()));
        }
        let mut header = std::collections::HashMap::new();
        let mut section: Option<Split> = None;
        let mut train = Vec::new();
        let mut test = Vec::new();
        for line in lines {
            match line {
                "[train]" => section = Some(Split::Train),
                "[test]" => section = Some(Split::Test),
                FRONT_HEADER => {}
                "" => {}
                _ => match section {
                    None => {
                        let (k, v) = line
                            .split_once('=')
                            .ok_or_else(|| Error::Data(format!("bad header line {line:?}")))?;
                        header.insert(k.to_string(), v.to_string());
                    }
                    Some(Split::Train) => train.push(FrontPoint::parse_csv_row(line)?),
                    Some(Split::Test) => test.push(FrontPoint::parse_csv_row(line)?),
                },
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Data(format!("record lacks `{k}`")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Data(format!("record field `{k}` is not an integer")))
        };
        Ok(RunRecord {
            dataset: get("dataset")?,
            algorithm: get("algorithm")?,
            run: num("run")? as usize,
            seed: num("seed")?,
            features: num("features")? as usize,
            evaluations: num("evaluations")? as usize,
            wall_time: None,
            train,
            test,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(self.file_name());
        fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Record directory of an experiment output directory. Accepts either the
/// output directory or its `records/` subdirectory.
pub fn records_dir(dir: &Path) -> PathBuf {
    let nested = dir.join("records");
    if nested.is_dir() {
        nested
    } else {
        dir.to_path_buf()
    }
}

/// Every `*.txt` record under `dir`, ordered by (dataset, algorithm, run).
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let dir = records_dir(dir);
    let entries = fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut records = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        if !text.starts_with(RECORD_MAGIC) {
            continue;
        }
        records.push(RunRecord::parse(&text)?);
    }
    records.sort_by(|a, b| (&a.dataset, &a.algorithm, a.run).cmp(&(&b.dataset, &b.algorithm, b.run)));
    Ok(records)
}

/// `manifest.csv`: one line per record, deterministic.
pub fn manifest_text(records: &[RunRecord]) -> String {
    let mut s = String::from("dataset,algorithm,run,seed,evaluations,train_points,test_points,file\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},records/{}\n",
            r.dataset,
            r.algorithm,
            r.run,
            r.seed,
            r.evaluations,
            r.train.len(),
            r.test.len(),
            r.file_name()
        ));
    }
    s
}

pub fn timings_text(records: &[RunRecord]) -> String {
    let mut s = String::from("dataset,algorithm,run,wall_time_ms\n");
    for r in records {
        let ms = r.wall_time.map_or(String::new(), |d| d.as_millis().to_string());
        s.push_str(&format!("{},{},{},{}\n", r.dataset, r.algorithm, r.run, ms));
    }
    s
}
