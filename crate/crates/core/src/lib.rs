//! Three-objective wrapper feature selection on incomplete tabular data.
//!
//! The objectives, all minimized, are
//!
//! 1. K-NN cross-validated classification error rate,
//! 2. number of selected features,
//! 3. share of the dataset's missing cells that fall inside the selected
//!    columns (percent).
//!
//! Datasets are min-max normalized and mean-imputed ([`dataset`]), candidate
//! solutions are real vectors binarized by a threshold ([`objectives`]), and
//! the search is driven by NSGA-III ([`nsga3`]) with NSGA-II ([`nsga2`]) and
//! random search as in-repo baselines. Fronts are scored with IGD and exact
//! 3-D hypervolume ([`metrics`]); [`harness`] runs and summarizes experiments.

pub mod dataset;
pub mod error;
pub mod evo;
pub mod harness;
pub mod knn;
pub mod metrics;
pub mod nsga2;
pub mod nsga3;
pub mod objectives;
pub mod random_search;
pub mod rng;

pub use error::{Error, Result};
