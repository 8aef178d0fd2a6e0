//! Summary, export and command-line behaviour.

mod common;

use std::fs;
use std::process::Command;

use fsmiss::harness::{export_fronts, load_records, summarize, FrontPoint, Metric, RunRecord, Split};
use fsmiss::metrics::{hypervolume_3d, HvConfig};
use fsmiss::objectives::{FeatureMask, ObjectiveVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn synthetic_records(seed: u64, runs: usize) -> Vec<RunRecord> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = 12;
    let mut out = Vec::new();
    for algorithm in ["nsga2", "nsga3"] {
        for run in 0..runs {
            let mut pts = Vec::new();
            for _ in 0..rng.random_range(1..6) {
                let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
                let size = bits.iter().filter(|b| **b).count().max(1);
                let mut bits = bits;
                if !bits.contains(&true) {
                    bits[0] = true;
                }
                pts.push(FrontPoint {
                    objectives: ObjectiveVector {
                        error_rate: rng.random_range(0.0..0.5),
                        size,
                        missing_rate_pct: rng.random_range(0.0..100.0),
                    },
                    mask: FeatureMask::from_bits(bits),
                });
            }
            out.push(RunRecord {
                dataset: "synthetic".into(),
                algorithm: algorithm.into(),
                run,
                seed: run as u64,
                features: n,
                evaluations: 100,
                wall_time: None,
                train: pts.clone(),
                test: pts.into_iter().rev().collect(),
            });
        }
    }
    out
}

#[test]
fn summary_statistics_match_recomputation() {
    let records = synthetic_records(42, 30);
    let table = summarize(&records, "nsga3").unwrap();
    let hv = HvConfig::for_features(12);
    for algorithm in ["nsga2", "nsga3"] {
        for split in Split::BOTH {
            // HV per run, straight from the records.
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.algorithm == algorithm)
                .map(|r| {
                    let pts: Vec<[f64; 3]> = r.points(split).iter().map(FrontPoint::objective_array).collect();
                    hypervolume_3d(&pts, &hv)
                })
                .collect();
            assert_eq!(values.len(), 30);
            let n = values.len() as f64;
            let mut sum = 0.0;
            for v in &values {
                sum += v;
            }
            let mv = sum / n;
            let mut ss = 0.0;
            for v in &values {
                ss += (v - mv) * (v - mv);
            }
            let sd = (ss / (n - 1.0)).sqrt();
            let row = table.row("synthetic", split, Metric::Hv, algorithm).unwrap();
            assert!((row.mean - mv).abs() <= 1e-12, "{} vs {}", row.mean, mv);
            assert!((row.sd.unwrap() - sd).abs() <= 1e-12);
            assert_eq!(row.values.len(), 30);
        }
    }
    for r in &table.rows {
        if r.algorithm == "nsga2" {
            assert!(r.mark.is_some());
        }
    }
}

#[test]
fn summary_text_and_csv_have_every_cell() {
    let table = summarize(&synthetic_records(1, 3), "nsga3").unwrap();
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    let text = table.to_text();
    for needle in ["IGD", "HV", "train", "test", "nsga3 MV", "nsga2 SD"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn export_is_sorted_and_reproducible() {
    let records = synthetic_records(7, 4);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files = export_fronts(&records, a.path()).unwrap();
    export_fronts(&records, b.path()).unwrap();
    assert_eq!(files.len(), 2 * 2 + 2);
    for f in &files {
        let name = f.file_name().unwrap();
        let text = fs::read_to_string(f).unwrap();
        assert_eq!(text, fs::read_to_string(b.path().join("fronts").join(name)).unwrap());
        let skip = usize::from(name.to_string_lossy().ends_with("__all.csv"));
        if skip == 0 {
            let f1: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
            assert!(f1.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn records_round_trip_through_a_directory() {
    let records = synthetic_records(9, 2);
    let dir = tempfile::tempdir().unwrap();
    for r in &records {
        r.write(&dir.path().join("records")).unwrap();
    }
    let back = load_records(dir.path()).unwrap();
    assert_eq!(back.len(), records.len());
    for r in &back {
        let orig = records.iter().find(|o| o.algorithm == r.algorithm && o.run == r.run).unwrap();
        assert_eq!(r.to_text(), orig.to_text());
    }
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsmiss"))
}

#[test]
fn cli_error_paths() {
    let empty = tempfile::tempdir().unwrap();
    let out = cli().arg("summarize").arg(empty.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no run records"));

    let out = cli().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
    let out = cli().args(["run", "--bogus", "x.cfg"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn cli_overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    fs::write(
        &cfg,
        format!(
            "dataset = hep, {}, first\nalgorithms = nsga3\nruns = 1\nnfe = 100000\npop = 100\nk = 5\nfolds = 10\n",
            common::data_dir().join("hepatitis.data").display()
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = cli()
        .arg("run")
        .arg(&cfg)
        .args(["--nfe", "60", "--pop", "20", "--seed", "5", "--algo", "nsga2,random", "--output"])
        .arg(&out_dir)
        .env("RUST_LOG", "warn")
        .status()
        .unwrap();
    assert!(status.success());
    let records = load_records(&out_dir).unwrap();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert_eq!(r.evaluations, 60);
        assert_eq!(r.seed, 5);
    }
    assert!(out_dir.join("fronts/hep__test__all.csv").exists());
    assert!(out_dir.join("manifest.csv").exists());

    let out = cli().arg("summarize").arg(out_dir.join("records")).arg("--reference").arg("nsga2").output().unwrap();
    assert!(out.status.success());
    assert!(out_dir.join("summary.csv").exists());
}

#[test]
fn cli_profile_prints_table_stats() {
    let out = cli()
        .arg("profile")
        .arg(common::data_dir().join("hepatitis.data"))
        .args(["--label", "first"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("instances (N): 155"));
    assert!(text.contains("classes: 2"));
    assert!(text.contains("5.39%"));
}
