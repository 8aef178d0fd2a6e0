#![allow(dead_code)]

use std::path::PathBuf;

use fsmiss::dataset::{load_csv, prepare, CsvOptions, Dataset, LabelColumn, RawTable};
use fsmiss::evo::dominates;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn hepatitis() -> Dataset {
    let opts = CsvOptions {
        label_column: LabelColumn::First,
        ..CsvOptions::default()
    };
    prepare(load_csv(data_dir().join("hepatitis.data"), &opts).unwrap()).unwrap()
}

/// `rows` x `features` table with random values, roughly `missing` of the
/// cells absent (never a whole column) and `classes` labels.
pub fn random_table(seed: u64, rows: usize, features: usize, classes: usize, missing: f64) -> RawTable {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(rows);
    for i in 0..rows {
        let row = (0..features)
            .map(|_| {
                let v: f64 = rng.random_range(-50.0..50.0);
                (i == 0 || !rng.random_bool(missing)).then_some(v)
            })
            .collect();
        data.push(row);
    }
    let labels = (0..rows).map(|i| if i < classes { i } else { rng.random_range(0..classes) }).collect();
    RawTable::new("random", data, labels).unwrap()
}

/// Fronts by repeatedly peeling off the points no remaining point dominates.
pub fn peel_fronts(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

pub fn random_points(rng: &mut StdRng, n: usize, m: usize, grid: Option<u32>) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..m)
                .map(|_| match grid {
                    Some(g) => rng.random_range(0..g) as f64,
                    None => rng.random::<f64>(),
                })
                .collect()
        })
        .collect()
}

/// Monte-Carlo estimate of the volume of `[0, r]^3` dominated by `front`,
/// with its standard error.
pub fn hv_monte_carlo(front: &[[f64; 3]], r: f64, samples: usize, rng: &mut StdRng) -> (f64, f64) {
    let mut hits = 0usize;
    for _ in 0..samples {
        let s = [rng.random::<f64>() * r, rng.random::<f64>() * r, rng.random::<f64>() * r];
        if front.iter().any(|p| p[0] <= s[0] && p[1] <= s[1] && p[2] <= s[2]) {
            hits += 1;
        }
    }
    let box_volume = r * r * r;
    let p = hits as f64 / samples as f64;
    (p * box_volume, (p * (1.0 - p) / samples as f64).sqrt() * box_volume)
}

/// Double-loop IGD written out independently.
pub fn igd_oracle(front: &[[f64; 3]], reference: &[[f64; 3]]) -> f64 {
    let mut sum = 0.0;
    for z in reference {
        let mut best = f64::INFINITY;
        for d in front {
            let dist = ((z[0] - d[0]).powi(2) + (z[1] - d[1]).powi(2) + (z[2] - d[2]).powi(2)).sqrt();
            if dist < best {
                best = dist;
            }
        }
        sum += best;
    }
    sum / reference.len() as f64
}

/// Random mutually non-dominated 3-D front of at most `max` points in the
/// unit cube.
pub fn random_front(rng: &mut StdRng, max: usize) -> Vec<[f64; 3]> {
    let n = rng.random_range(1..=max);
    let pts: Vec<[f64; 3]> = (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    pts.iter()
        .filter(|p| !pts.iter().any(|q| dominates(q, &p[..])))
        .copied()
        .collect()
}
