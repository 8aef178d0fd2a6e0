//! Front quality indicators and significance testing: IGD, exact
//! three-objective hypervolume, reference-set construction and Welch's
//! unequal-variance t-test.

use std::fmt;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::evo::dominates;

/// Mean over `reference` of the distance to the closest point of `front`.
pub fn igd<A: AsRef<[f64]>, B: AsRef<[f64]>>(front: &[A], reference: &[B]) -> Result<f64> {
    if front.is_empty() || reference.is_empty() {
        return Err(Error::Contract("IGD needs non-empty front and reference set".into()));
    }
    let dim = reference[0].as_ref().len();
    if front.iter().any(|d| d.as_ref().len() != dim) || reference.iter().any(|z| z.as_ref().len() != dim) {
        return Err(Error::Contract("IGD inputs differ in dimension".into()));
    }
    let mut total = 0.0;
    for z in reference {
        let mut best = f64::INFINITY;
        for d in front {
            let mut sq = 0.0;
            for (a, b) in z.as_ref().iter().zip(d.as_ref()) {
                sq += (a - b) * (a - b);
            }
            best = best.min(sq.sqrt());
        }
        total += best;
    }
    Ok(total / reference.len() as f64)
}

/// Objectives are divided by `divisors` before being measured against
/// `reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvConfig {
    pub reference: [f64; 3],
    pub divisors: [f64; 3],
}

impl HvConfig {
    /// Error rate as is, size over `n`, missing percentage over 100, with a
    /// reference point of 1.1 on each axis.
    pub fn for_features(n: usize) -> Self {
        HvConfig {
            reference: [1.1; 3],
            divisors: [1.0, n as f64, 100.0],
        }
    }

    pub fn scale(&self, p: &[f64]) -> [f64; 3] {
        [
            p[0] / self.divisors[0],
            p[1] / self.divisors[1],
            p[2] / self.divisors[2],
        ]
    }
}

/// Area dominated by `pts` (x-sorted) inside `[.., rx] x [.., ry]`.
fn staircase_area(pts: &mut [[f64; 2]], rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut floor = ry;
    for p in pts.iter() {
        if p[1] < floor {
            area += (rx - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    area
}

/// Exact dominated hypervolume of a three-objective front, by slicing along
/// the third objective. Points not strictly inside the reference box add
/// nothing.
pub fn hypervolume_3d<T: AsRef<[f64]>>(front: &[T], cfg: &HvConfig) -> f64 {
    let [rx, ry, rz] = cfg.reference;
    let mut pts: Vec<[f64; 3]> = front
        .iter()
        .map(|p| cfg.scale(p.as_ref()))
        .filter(|p| p[0] < rx && p[1] < ry && p[2] < rz)
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));

    let mut volume = 0.0;
    let mut slice: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let z = pts[i][2];
        while i < pts.len() && pts[i][2] == z {
            slice.push([pts[i][0], pts[i][1]]);
            i += 1;
        }
        let next_z = if i < pts.len() { pts[i][2] } else { rz };
        volume += staircase_area(&mut slice, rx, ry) * (next_z - z);
    }
    volume
}

/// Non-dominated, deduplicated union of `fronts`, sorted lexicographically.
pub fn build_reference_set(fronts: &[Vec<[f64; 3]>]) -> Vec<[f64; 3]> {
    let mut all: Vec<[f64; 3]> = fronts.iter().flatten().copied().collect();
    all.sort_by(|a, b| {
        a[0].total_cmp(&b[0])
            .then(a[1].total_cmp(&b[1]))
            .then(a[2].total_cmp(&b[2]))
    });
    all.dedup();
    all.iter()
        .filter(|p| !all.iter().any(|q| dominates(q, &p[..])))
        .copied()
        .collect()
}

/// Which direction of a metric is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    LowerIsBetter,
    HigherIsBetter,
}

/// Outcome of comparing a reference algorithm against another one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Reference significantly better.
    Better,
    /// Reference significantly worse.
    Worse,
    Similar,
}

impl Verdict {
    pub fn symbol(&self) -> &'static str {
        match self {
            Verdict::Better => "+",
            Verdict::Worse => "-",
            Verdict::Similar => "=",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub verdict: Verdict,
}

pub const SIGNIFICANCE: f64 = 0.05;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Two-sided Welch test of `reference` against `other` at the 5% level.
/// The verdict is from the point of view of `reference`.
pub fn welch_t_test(reference: &[f64], other: &[f64], orientation: Orientation) -> Result<TTest> {
    if reference.len() < 2 || other.len() < 2 {
        return Err(Error::Contract("Welch's test needs at least two values per sample".into()));
    }
    if reference.iter().chain(other).any(|x| !x.is_finite()) {
        return Err(Error::Contract("samples must be finite".into()));
    }
    let (na, nb) = (reference.len() as f64, other.len() as f64);
    let (ma, mb) = (mean(reference), mean(other));
    let (va, vb) = (sample_variance(reference) / na, sample_variance(other) / nb);
    let se2 = va + vb;

    let (t, df, p) = if se2 == 0.0 {
        if ma == mb {
            (0.0, f64::NAN, 1.0)
        } else {
            let t = if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY };
            (t, f64::NAN, 0.0)
        }
    } else {
        let t = (ma - mb) / se2.sqrt();
        let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Evaluation(e.to_string()))?;
        (t, df, (2.0 * dist.sf(t.abs())).min(1.0))
    };

    let verdict = if p >= SIGNIFICANCE {
        Verdict::Similar
    } else {
        let reference_better = match orientation {
            Orientation::LowerIsBetter => ma < mb,
            Orientation::HigherIsBetter => ma > mb,
        };
        if reference_better {
            Verdict::Better
        } else {
            Verdict::Worse
        }
    };
    Ok(TTest { t, df, p, verdict })
}
