//! `cfsmote` command-line runner.
//!
//! Progress goes to stderr; results go to files (`run`) or stdout (`compare`,
//! `inspect`).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use cfsmote::datasets::{load_dataset, DatasetManifest};
use cfsmote::experiment::{compare, run_experiment, Aggregate, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cfsmote",
    version,
    about = "Fairness-aware continuous SMOTE stream experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Seeds as `a..b` (half-open) or a comma-separated list.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<Seeds>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        snapshot_every: Option<usize>,
        /// Number of seeds run concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Directory holding the dataset files, overriding the manifest.
        #[arg(long, env = "CFSMOTE_DATA_DIR")]
        data_dir: Option<PathBuf>,
        /// Truncate every permuted stream to this many samples.
        #[arg(long)]
        max_samples: Option<usize>,
    },
    /// Relative change of report A against baseline report B, as markdown.
    Compare {
        /// Aggregate CSV or run directory.
        a: PathBuf,
        /// Aggregate CSV or run directory used as the baseline.
        b: PathBuf,
        /// Also write the delta table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a dataset manifest and print its load report as JSON.
    Inspect {
        manifest: PathBuf,
        #[arg(long, env = "CFSMOTE_DATA_DIR")]
        data_dir: Option<PathBuf>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
        (a..b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|e| format!("bad seed `{t}`: {e}")))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(Seeds(seeds))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            out,
            snapshot_every,
            parallel,
            data_dir,
            max_samples,
        } => {
            let mut cfg =
                ExperimentConfig::from_file(&config).with_context(|| format!("reading config {}", config.display()))?;
            if let Some(seeds) = seeds {
                cfg.seeds = seeds.0;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(n) = snapshot_every {
                cfg.snapshot_every = n;
            }
            if let Some(dir) = data_dir {
                cfg.data_dir = Some(dir);
            }
            if max_samples.is_some() {
                cfg.max_samples = max_samples;
            }
            if parallel == 0 {
                bail!("--parallel must be at least 1");
            }
            let outcome = run_experiment(&cfg, parallel)?;
            tracing::info!(
                runs = outcome.reports.len(),
                output = %outcome.output_dir.display(),
                "experiment finished"
            );
        }
        Command::Compare { a, b, out } => {
            let a = Aggregate::read_csv(&a).with_context(|| format!("reading {}", a.display()))?;
            let b = Aggregate::read_csv(&b).with_context(|| format!("reading {}", b.display()))?;
            let table = compare(&a, &b)?;
            print!("{}", table.to_markdown());
            if let Some(path) = out {
                std::fs::write(&path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Inspect {
            manifest,
            data_dir,
            out,
        } => {
            let mut m = DatasetManifest::from_file(&manifest)
                .with_context(|| format!("reading manifest {}", manifest.display()))?;
            if let Some(dir) = data_dir {
                m = m.rebase(dir);
            }
            let data = load_dataset(&m)?;
            println!("{}", serde_json::to_string_pretty(&data.report)?);
            if let Some(path) = out {
                data.report.write_json(&path)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_syntax() {
        assert_eq!(parse_seeds("0..3").unwrap().0, vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 7,9").unwrap().0, vec![4, 7, 9]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
