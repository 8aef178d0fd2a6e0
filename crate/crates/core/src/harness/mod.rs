//! Multi-run experiments: configuration, run records, summary tables and
//! plot-ready front exports.

pub mod config;
pub mod experiment;
pub mod export;
pub mod record;
pub mod summary;

pub use config::{Algorithm, DatasetSpec, ExperimentConfig};
pub use experiment::{run_cell, run_experiment, ExperimentOutput};
pub use export::export_fronts;
pub use record::{load_records, FrontPoint, RunRecord, Split};
pub use summary::{summarize, Metric, SummaryRow, SummaryTable};

/// Shortest round-trip decimal, always with a decimal point or exponent
/// (`10` prints as `10.0`).
pub fn format_f64(x: f64) -> String {
    let s = format!("{x}");
    if x.is_finite() && !s.contains(['.', 'e', 'E']) {
        format!("{s}.0")
    } else {
        s
    }
}
