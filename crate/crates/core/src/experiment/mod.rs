//! Multi-seed experiment runner: permute, run test-then-train, persist reports
//! and aggregate mean ± sample std per metric.

mod config;
mod report;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{load_dataset, permute_stream, DatasetManifest, LoadedDataset};
use crate::error::{Error, Result};
use crate::fairness::{FlipLedger, GroupConfusionLedger};
use crate::stream::{run_test_then_train, Evaluators, MetricSet, PrequentialLedger, RunReport, StepTotals};

pub use config::{
    derive_seed, ExperimentConfig, LearnerConfig, LearnerKind, PipelineConfig, PipelineKind, DEFAULT_ENSEMBLE_SIZE,
    DEFAULT_SEEDS,
};
pub use report::{
    compare, mean_and_std, relative_change, Aggregate, AggregateRow, DeltaRow, DeltaTable, COUNTER_NAMES,
};

/// Contents of `run_<seed>.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub experiment: String,
    pub dataset: String,
    pub n_seen: u64,
    pub metrics: MetricSet,
    pub totals: StepTotals,
    pub ledger: PrequentialLedger,
    pub groups: GroupConfusionLedger,
    pub flips: FlipLedger,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub aggregate: Aggregate,
    pub reports: Vec<(u64, RunReport)>,
    pub output_dir: PathBuf,
}

pub fn load_experiment_dataset(config: &ExperimentConfig) -> Result<LoadedDataset> {
    let mut manifest = DatasetManifest::from_file(&config.dataset)?;
    if let Some(dir) = &config.data_dir {
        manifest = manifest.rebase(dir);
    }
    load_dataset(&manifest)
}

/// One seeded run over an already loaded dataset.
pub fn run_seed(config: &ExperimentConfig, data: &LoadedDataset, seed: u64) -> Result<RunReport> {
    let mut stream = permute_stream(&data.instances, derive_seed(seed, 0));
    if let Some(max) = config.max_samples {
        stream.truncate(max);
    }
    let mut pipeline = config.build_pipeline(&data.schema, seed)?;
    let evaluators = match config.window {
        Some(w) => Evaluators::with_window(w),
        None => Evaluators::new(),
    };
    run_test_then_train(
        &stream,
        &data.schema,
        pipeline.as_mut(),
        evaluators,
        config.snapshot_every,
    )
}

fn persist_run(config: &ExperimentConfig, dataset: &str, seed: u64, report: &RunReport, dir: &Path) -> Result<()> {
    report.write_trajectory_csv(&dir.join(format!("run_{seed}.csv")))?;
    report.write_events_csv(&dir.join(format!("events_{seed}.csv")))?;
    let summary = RunSummary {
        seed,
        experiment: config.label(),
        dataset: dataset.to_string(),
        n_seen: report.n_seen,
        metrics: report.metrics,
        totals: report.totals,
        ledger: report.ledger,
        groups: report.groups,
        flips: report.flips,
    };
    let path = dir.join(format!("run_{seed}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&summary)?).map_err(|e| Error::io(&path, e))
}

/// Runs every seed, writes per-run files and the aggregate into
/// `config.output_dir`. `parallel` bounds the number of concurrent seeds.
pub fn run_experiment(config: &ExperimentConfig, parallel: usize) -> Result<ExperimentOutcome> {
    config.validate()?;
    let data = load_experiment_dataset(config)?;
    run_experiment_on(config, &data, parallel)
}

pub fn run_experiment_on(
    config: &ExperimentConfig,
    data: &LoadedDataset,
    parallel: usize,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let dataset = data.report.dataset.clone();
    let one = |seed: u64| -> Result<(u64, RunReport)> {
        tracing::info!(seed, experiment = %config.label(), "starting run");
        let report = run_seed(config, data, seed)
            .and_then(|r| persist_run(config, &dataset, seed, &r, &dir).map(|()| r))
            .map_err(|e| Error::SeedFailed {
                seed,
                source: Box::new(e),
            })?;
        Ok((seed, report))
    };
    let results: Vec<Result<(u64, RunReport)>> = if parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {parallel} workers: {e}")))?;
        pool.install(|| config.seeds.par_iter().map(|&s| one(s)).collect())
    } else {
        config.seeds.iter().map(|&s| one(s)).collect()
    };
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;
    let runs: Vec<RunReport> = reports.iter().map(|(_, r)| r.clone()).collect();
    let aggregate = Aggregate::from_reports(config.label(), &runs);
    let csv_path = dir.join("aggregate.csv");
    std::fs::write(&csv_path, aggregate.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
    let md_path = dir.join("aggregate.md");
    std::fs::write(&md_path, aggregate.to_markdown()).map_err(|e| Error::io(&md_path, e))?;
    let config_path = dir.join("config.toml");
    let text = toml::to_string(config).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    std::fs::write(&config_path, text).map_err(|e| Error::io(&config_path, e))?;
    Ok(ExperimentOutcome {
        aggregate,
        reports,
        output_dir: dir,
    })
}
