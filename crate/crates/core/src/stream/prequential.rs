//! Test-then-train driver and run reports.

use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{FlipLedger, GroupConfusionLedger};
use crate::learners::Classifier;
use crate::stream::instance::{Bit, Instance, StreamSchema};
use crate::stream::metrics::{Metric, PrequentialLedger};

pub const DEFAULT_SNAPSHOT_EVERY: usize = 500;
const PROGRESS_EVERY: u64 = 10_000;

/// What happened while a pipeline consumed one labelled sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// Samples (natural and synthetic) handed to the learner.
    pub trained: usize,
    pub synthetic: usize,
    /// Samples withheld from the learner by situation testing.
    pub discarded: usize,
    /// The rebalancing window was cut after a distribution drift.
    pub shrunk: bool,
    /// The learner was reset after an error drift.
    pub learner_resets: usize,
}

impl StepOutcome {
    pub fn is_eventful(&self) -> bool {
        self.synthetic > 0 || self.discarded > 0 || self.shrunk || self.learner_resets > 0
    }
}

/// Anything that can be evaluated prequentially: a bare learner or a
/// rebalancing pre-processor wrapped around one.
pub trait Pipeline {
    /// Externally visible prediction. Must not change pipeline state.
    fn predict_one(&self, x: &Instance) -> Bit;

    fn learn_one(&mut self, x: &Instance) -> StepOutcome;
}

/// A learner without pre-processing.
#[derive(Clone, Debug, Serialize)]
pub struct BarePipeline<C> {
    pub learner: C,
}

impl<C: Classifier> BarePipeline<C> {
    pub fn new(learner: C) -> Self {
        BarePipeline { learner }
    }
}

impl<C: Classifier> Pipeline for BarePipeline<C> {
    fn predict_one(&self, x: &Instance) -> Bit {
        self.learner.predict_one(x)
    }

    fn learn_one(&mut self, x: &Instance) -> StepOutcome {
        let before = self.learner.resets();
        self.learner.learn_one(x);
        StepOutcome {
            trained: 1,
            learner_resets: (self.learner.resets() - before) as usize,
            ..StepOutcome::default()
        }
    }
}

/// The full metric set reported per run and per snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: Metric,
    pub balanced_accuracy: Metric,
    pub recall: Metric,
    pub geometric_mean: Metric,
    pub statistical_parity: Metric,
    pub disparate_impact: Metric,
    pub disparate_impact_symmetric: Metric,
    pub equal_opportunity: Metric,
    pub equal_fpr: Metric,
    pub individual_fairness: Metric,
}

impl MetricSet {
    pub const NAMES: [&'static str; 10] = [
        "accuracy",
        "balanced_accuracy",
        "recall",
        "geometric_mean",
        crate::fairness::STATISTICAL_PARITY,
        crate::fairness::DISPARATE_IMPACT,
        crate::fairness::DISPARATE_IMPACT_SYMMETRIC,
        crate::fairness::EQUAL_OPPORTUNITY,
        crate::fairness::EQUAL_FPR,
        crate::fairness::INDIVIDUAL_FAIRNESS,
    ];

    pub fn compute(perf: &PrequentialLedger, groups: &GroupConfusionLedger, flips: &FlipLedger) -> Self {
        MetricSet {
            accuracy: perf.accuracy(),
            balanced_accuracy: perf.balanced_accuracy(),
            recall: perf.recall(),
            geometric_mean: perf.geometric_mean(),
            statistical_parity: groups.statistical_parity(),
            disparate_impact: groups.disparate_impact(),
            disparate_impact_symmetric: groups.disparate_impact_symmetric(),
            equal_opportunity: groups.equal_opportunity(),
            equal_fpr: groups.equal_fpr(),
            individual_fairness: flips.individual_fairness(),
        }
    }

    pub fn values(&self) -> [Metric; 10] {
        [
            self.accuracy,
            self.balanced_accuracy,
            self.recall,
            self.geometric_mean,
            self.statistical_parity,
            self.disparate_impact,
            self.disparate_impact_symmetric,
            self.equal_opportunity,
            self.equal_fpr,
            self.individual_fairness,
        ]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Metric)> {
        Self::NAMES.into_iter().zip(self.values())
    }

    pub fn get(&self, name: &str) -> Option<Metric> {
        self.iter().find(|(n, _)| *n == name).map(|(_, m)| m)
    }
}

#[derive(Clone, Copy, Debug)]
struct Record {
    sensitive: Bit,
    truth: Bit,
    predicted: Bit,
    flipped: bool,
}

#[derive(Clone, Debug, Default)]
struct Trackers {
    perf: PrequentialLedger,
    groups: GroupConfusionLedger,
    flips: FlipLedger,
}

impl Trackers {
    fn add(&mut self, r: Record) {
        self.perf.record(r.truth, r.predicted);
        self.groups.record(r.sensitive, r.truth, r.predicted);
        self.flips.record(r.flipped);
    }

    fn metrics(&self) -> MetricSet {
        MetricSet::compute(&self.perf, &self.groups, &self.flips)
    }
}

/// Cumulative metric trackers, optionally paired with a sliding window of the
/// most recent evaluations for trajectory plots.
#[derive(Clone, Debug, Default)]
pub struct Evaluators {
    cumulative: Trackers,
    window: Option<(usize, VecDeque<Record>)>,
}

impl Evaluators {
    pub fn new() -> Self {
        Evaluators::default()
    }

    pub fn with_window(size: usize) -> Self {
        Evaluators {
            cumulative: Trackers::default(),
            window: (size > 0).then(|| (size, VecDeque::with_capacity(size))),
        }
    }

    pub fn update(&mut self, sensitive: Bit, truth: Bit, predicted: Bit, flipped: bool) {
        let r = Record {
            sensitive,
            truth,
            predicted,
            flipped,
        };
        self.cumulative.add(r);
        if let Some((size, records)) = &mut self.window {
            if records.len() == *size {
                records.pop_front();
            }
            records.push_back(r);
        }
    }

    pub fn n_seen(&self) -> u64 {
        self.cumulative.perf.n_seen
    }

    pub fn metrics(&self) -> MetricSet {
        self.cumulative.metrics()
    }

    pub fn windowed_metrics(&self) -> Option<MetricSet> {
        self.window.as_ref().map(|(_, records)| {
            let mut t = Trackers::default();
            records.iter().for_each(|r| t.add(*r));
            t.metrics()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub n_seen: u64,
    pub metrics: MetricSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windowed: Option<MetricSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRow {
    pub sample: u64,
    pub synthetic: usize,
    pub discarded: usize,
    pub shrunk: bool,
    pub learner_resets: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTotals {
    pub trained: u64,
    pub synthetic: u64,
    pub discarded: u64,
    pub shrinks: u64,
    pub learner_resets: u64,
}

/// Immutable result of one prequential run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n_seen: u64,
    pub metrics: MetricSet,
    pub ledger: PrequentialLedger,
    pub groups: GroupConfusionLedger,
    pub flips: FlipLedger,
    pub totals: StepTotals,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<EventRow>,
}

impl RunReport {
    pub fn write_trajectory_csv(&self, path: &Path) -> Result<()> {
        let windowed = self.snapshots.iter().any(|s| s.windowed.is_some());
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        let mut header = vec!["n_seen".to_string()];
        header.extend(MetricSet::NAMES.iter().map(|n| n.to_string()));
        if windowed {
            header.extend(MetricSet::NAMES.iter().map(|n| format!("window_{n}")));
        }
        let io = |e| Error::io(path, e);
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for s in &self.snapshots {
            let mut row = vec![s.n_seen.to_string()];
            row.extend(s.metrics.values().iter().map(|m| csv_cell(*m)));
            if windowed {
                match &s.windowed {
                    Some(w) => row.extend(w.values().iter().map(|m| csv_cell(*m))),
                    None => row.extend(std::iter::repeat_n(String::new(), MetricSet::NAMES.len())),
                }
            }
            writeln!(out, "{}", row.join(",")).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn write_events_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["sample", "synthetic", "discarded", "shrunk", "learner_resets"])?;
        for e in &self.events {
            w.write_record([
                e.sample.to_string(),
                e.synthetic.to_string(),
                e.discarded.to_string(),
                u8::from(e.shrunk).to_string(),
                e.learner_resets.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Undefined metrics are written as empty cells.
pub(crate) fn csv_cell(m: Metric) -> String {
    m.value().map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Drives `pipeline` over `stream` in test-then-train order.
///
/// For every instance the pipeline first predicts it and its sensitive-flipped
/// counterfactual, the evaluators are updated, and only then is the labelled
/// instance handed over for training.
pub fn run_test_then_train<'a, P, I>(
    stream: I,
    schema: &StreamSchema,
    pipeline: &mut P,
    mut evaluators: Evaluators,
    snapshot_every: usize,
) -> Result<RunReport>
where
    P: Pipeline + ?Sized,
    I: IntoIterator<Item = &'a Instance>,
{
    let mut snapshots = Vec::new();
    let mut events = Vec::new();
    let mut totals = StepTotals::default();

    for x in stream {
        schema.validate(x)?;
        let predicted = pipeline.predict_one(x);
        let counterfactual = pipeline.predict_one(&x.counterfactual(schema));
        evaluators.update(x.sensitive, x.label, predicted, predicted != counterfactual);

        let step = pipeline.learn_one(x);
        let n = evaluators.n_seen();
        totals.trained += step.trained as u64;
        totals.synthetic += step.synthetic as u64;
        totals.discarded += step.discarded as u64;
        totals.shrinks += u64::from(step.shrunk);
        totals.learner_resets += step.learner_resets as u64;
        if step.is_eventful() {
            events.push(EventRow {
                sample: n - 1,
                synthetic: step.synthetic,
                discarded: step.discarded,
                shrunk: step.shrunk,
                learner_resets: step.learner_resets,
            });
        }

        if snapshot_every > 0 && n.is_multiple_of(snapshot_every as u64) {
            snapshots.push(Snapshot {
                n_seen: n,
                metrics: evaluators.metrics(),
                windowed: evaluators.windowed_metrics(),
            });
        }
        if n.is_multiple_of(PROGRESS_EVERY) {
            tracing::info!(samples = n, synthetic = totals.synthetic, "progress");
        }
    }

    let n_seen = evaluators.n_seen();
    if snapshots.last().map(|s| s.n_seen) != Some(n_seen) && n_seen > 0 {
        snapshots.push(Snapshot {
            n_seen,
            metrics: evaluators.metrics(),
            windowed: evaluators.windowed_metrics(),
        });
    }
    Ok(RunReport {
        n_seen,
        metrics: evaluators.metrics(),
        ledger: evaluators.cumulative.perf,
        groups: evaluators.cumulative.groups,
        flips: evaluators.cumulative.flips,
        totals,
        snapshots,
        events,
    })
}
