//! Flat `key = value` experiment configuration. `#` starts a comment; the
//! `dataset` key may repeat. Every key has a CLI flag of the same name.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataset::{CsvOptions, LabelColumn};
use crate::error::{Error, Result};
use crate::evo::SearchConfig;
use crate::knn::KnnConfig;
use crate::nsga3::Nsga3Config;
use crate::objectives::EvalConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Nsga3,
    Nsga2,
    Random,
}

impl Algorithm {
    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Nsga3 => "nsga3",
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
            "nsga3" | "nsgaiii" => Ok(Algorithm::Nsga3),
            "nsga2" | "nsgaii" => Ok(Algorithm::Nsga2),
            "random" => Ok(Algorithm::Random),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// `name, path[, first|last]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    pub label_column: LabelColumn,
}

impl DatasetSpec {
    pub fn parse(value: &str, base_dir: &Path) -> Result<Self> {
        let parts: Vec<&str> = value.split(',').map(str::trim).collect();
        if !(2..=3).contains(&parts.len()) || parts[0].is_empty() || parts[1].is_empty() {
            return Err(Error::Config(format!(
                "dataset must be `name, path[, first|last]`, got {value:?}"
            )));
        }
        if !parts[0].chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') {
            return Err(Error::Config(format!("dataset name {:?} has unsupported characters", parts[0])));
        }
        let path = PathBuf::from(parts[1]);
        let path = if path.is_absolute() { path } else { base_dir.join(path) };
        let label_column = match parts.get(2) {
            Some(p) => p.parse()?,
            None => LabelColumn::Last,
        };
        Ok(DatasetSpec {
            name: parts[0].to_string(),
            path,
            label_column,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    pub nfe: usize,
    pub pop: usize,
    pub theta: f64,
    pub k: usize,
    pub folds: usize,
    pub train_fraction: f64,
    pub divisions: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub missing_token: String,
    pub skip_header: bool,
    pub reference: Algorithm,
    /// Run independent cells on the rayon pool.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: Vec::new(),
            algorithms: vec![Algorithm::Nsga3, Algorithm::Nsga2],
            runs: 30,
            nfe: 100_000,
            pop: 100,
            theta: 0.6,
            k: 5,
            folds: 10,
            train_fraction: 0.7,
            divisions: 13,
            seed: 1,
            output: PathBuf::from("results"),
            missing_token: "?".into(),
            skip_header: false,
            reference: Algorithm::Nsga3,
            parallel: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {value:?} for `{key}`"))),
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Relative dataset and output paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut output_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected `key = value`", i + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if key == "output" {
                output_set = true;
                let p = PathBuf::from(value);
                cfg.output = if p.is_absolute() { p } else { base_dir.join(p) };
                continue;
            }
            cfg.set(key, value, base_dir)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        if !output_set {
            cfg.output = base_dir.join(&cfg.output);
        }
        Ok(cfg)
    }

    /// Applies one `key = value` pair. `dataset` appends.
    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<()> {
        match key {
            "dataset" => self.datasets.push(DatasetSpec::parse(value, base_dir)?),
            "algorithms" | "algo" => {
                self.algorithms = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?;
            }
            "runs" => self.runs = parse_value(key, value)?,
            "nfe" => self.nfe = parse_value(key, value)?,
            "pop" => self.pop = parse_value(key, value)?,
            "theta" => self.theta = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "folds" => self.folds = parse_value(key, value)?,
            "train_fraction" => self.train_fraction = parse_value(key, value)?,
            "divisions" => self.divisions = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "missing_token" => self.missing_token = value.to_string(),
            "skip_header" => self.skip_header = parse_bool(key, value)?,
            "reference" => self.reference = value.parse()?,
            "parallel" => self.parallel = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets configured".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms configured".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
        }
        self.eval_config().validate()?;
        self.nsga3_config(0).validate()
    }

    pub fn csv_options(&self, spec: &DatasetSpec) -> CsvOptions {
        CsvOptions {
            missing_token: self.missing_token.clone(),
            skip_header: self.skip_header,
            label_column: spec.label_column,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            threshold: self.theta,
            knn: KnnConfig {
                k: self.k,
                folds: self.folds,
            },
        }
    }

    pub fn search_config(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            population_size: self.pop,
            max_evaluations: self.nfe,
            variation: None,
            seed,
        }
    }

    pub fn nsga3_config(&self, seed: u64) -> Nsga3Config {
        Nsga3Config {
            search: self.search_config(seed),
            divisions: self.divisions,
        }
    }

    /// Seed of run `r`.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}
