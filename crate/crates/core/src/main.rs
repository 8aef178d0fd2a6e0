use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use fsmiss::dataset::{load_csv, CsvOptions, LabelColumn, ProfileReport};
use fsmiss::harness::{export_fronts, load_records, run_experiment, summarize, ExperimentConfig, Split};

#[derive(Parser)]
#[command(name = "fsmiss", version, about = "Three-objective feature selection on incomplete datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instance, class and missing-value statistics of a data file.
    Profile {
        dataset: PathBuf,
        /// Position of the class label.
        #[arg(long, default_value = "last")]
        label: LabelColumn,
        #[arg(long, default_value = "?")]
        missing_token: String,
        #[arg(long)]
        skip_header: bool,
    },
    /// Run an experiment described by a config file, then export its fronts.
    Run {
        config: PathBuf,
        #[arg(long)]
        nfe: Option<usize>,
        #[arg(long)]
        pop: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Comma-separated algorithm list (nsga3, nsga2, random).
        #[arg(long)]
        algo: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Run independent cells in parallel.
        #[arg(long)]
        parallel: bool,
    },
    /// MV/SD/significance table of a records directory.
    Summarize {
        records: PathBuf,
        #[arg(long, default_value = "nsga3")]
        reference: String,
        /// Where to write summary files (defaults to the records directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot-ready front CSVs of a records directory.
    Export {
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Output directory for a records path: the experiment root when given its
/// `records/` subdirectory.
fn root_of(records: &Path) -> PathBuf {
    if records.file_name().is_some_and(|n| n == "records") {
        records.parent().map(Path::to_path_buf).unwrap_or_default()
    } else {
        records.to_path_buf()
    }
}

fn load_nonempty(records: &Path) -> anyhow::Result<Vec<fsmiss::harness::RunRecord>> {
    let recs = load_records(records).with_context(|| format!("reading records from {}", records.display()))?;
    if recs.is_empty() {
        bail!("no run records found in {}", records.display());
    }
    Ok(recs)
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Profile {
            dataset,
            label,
            missing_token,
            skip_header,
        } => {
            let opts = CsvOptions {
                missing_token,
                skip_header,
                label_column: label,
            };
            let table = load_csv(&dataset, &opts)?;
            println!("{}", ProfileReport::of(&table));
        }
        Command::Run {
            config,
            nfe,
            pop,
            theta,
            seed,
            runs,
            algo,
            output,
            parallel,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            let cwd = Path::new(".");
            let overrides = [
                ("nfe", nfe.map(|v| v.to_string())),
                ("pop", pop.map(|v| v.to_string())),
                ("theta", theta.map(|v| v.to_string())),
                ("seed", seed.map(|v| v.to_string())),
                ("runs", runs.map(|v| v.to_string())),
                ("algorithms", algo),
            ];
            for (key, value) in overrides {
                if let Some(v) = value {
                    cfg.set(key, &v, cwd)?;
                }
            }
            if let Some(o) = output {
                cfg.output = o;
            }
            cfg.parallel |= parallel;
            let out = cfg.output.clone();
            let result = run_experiment(&cfg, &out)?;
            if result.records.is_empty() {
                bail!("no runs completed: {}", result.failures.join("; "));
            }
            export_fronts(&result.records, &out)?;
            println!("{} records written to {}", result.records.len(), out.join("records").display());
            if !result.failures.is_empty() {
                bail!("{} failure(s): {}", result.failures.len(), result.failures.join("; "));
            }
        }
        Command::Summarize { records, reference, out } => {
            let recs = load_nonempty(&records)?;
            let table = summarize(&recs, &reference)?;
            print!("{}", table.to_text());
            for split in Split::BOTH {
                for other in table.algorithms() {
                    if other == reference {
                        continue;
                    }
                    let (wins, total) = table.hv_not_worse(&reference, other, split);
                    println!("{reference} not worse than {other} on {split} HV: {wins}/{total} datasets");
                }
            }
            table.write(&out.unwrap_or_else(|| root_of(&records)))?;
        }
        Command::Export { records, out } => {
            let recs = load_nonempty(&records)?;
            let paths = export_fronts(&recs, &out.unwrap_or_else(|| root_of(&records)))?;
            println!("{} front files written", paths.len());
        }
    }
    Ok(())
}
