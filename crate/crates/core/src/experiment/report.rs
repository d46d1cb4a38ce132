use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{MetricSet, RunReport};

/// Mean and sample standard deviation of one metric over seeded runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub metric: String,
    /// `None` when the metric is undefined in every run.
    pub mean: Option<f64>,
    /// `None` with fewer than one defined value; `0` with exactly one.
    pub std: Option<f64>,
    /// Runs in which the metric was defined.
    pub runs: usize,
}

/// Per-metric aggregate over the runs of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub label: String,
    pub rows: Vec<AggregateRow>,
}

/// Extra per-run counters aggregated alongside the metrics.
pub const COUNTER_NAMES: [&str; 4] = ["synthetic", "discarded", "window_shrinks", "learner_resets"];

pub fn mean_and_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Some(mean), Some(std))
}

fn row(metric: &str, values: &[f64]) -> AggregateRow {
    let (mean, std) = mean_and_std(values);
    AggregateRow {
        metric: metric.to_string(),
        mean,
        std,
        runs: values.len(),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl Aggregate {
    pub fn from_reports(label: impl Into<String>, reports: &[RunReport]) -> Self {
        let mut rows: Vec<AggregateRow> = MetricSet::NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let values: Vec<f64> = reports.iter().filter_map(|r| r.metrics.values()[i].value()).collect();
                row(name, &values)
            })
            .collect();
        let counters: [fn(&RunReport) -> u64; 4] = [
            |r| r.totals.synthetic,
            |r| r.totals.discarded,
            |r| r.totals.shrinks,
            |r| r.totals.learner_resets,
        ];
        for (name, get) in COUNTER_NAMES.iter().zip(counters) {
            let values: Vec<f64> = reports.iter().map(|r| get(r) as f64).collect();
            rows.push(row(name, &values));
        }
        Aggregate {
            label: label.into(),
            rows,
        }
    }

    pub fn get(&self, metric: &str) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.get(metric).and_then(|r| r.mean)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,mean,std,runs\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.metric, cell(r.mean), cell(r.std), r.runs);
        }
        out
    }

    /// Reads an `aggregate.csv`, or the one inside a run directory. The label
    /// is the directory name.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut path = path.as_ref().to_path_buf();
        if path.is_dir() {
            path.push("aggregate.csv");
        }
        let label = path
            .parent()
            .and_then(|p| p.file_name())
            .map_or_else(|| "report".to_string(), |n| n.to_string_lossy().into_owned());
        let mut reader = csv::Reader::from_path(&path)?;
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["metric", "mean", "std", "runs"] {
            return Err(Error::ReportMismatch(format!(
                "{} is not an aggregate CSV",
                path.display()
            )));
        }
        let parse = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| Error::ReportMismatch(format!("bad number `{s}` in {}", path.display())))
        };
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            rows.push(AggregateRow {
                metric: record[0].to_string(),
                mean: parse(&record[1])?,
                std: parse(&record[2])?,
                runs: record[3]
                    .parse()
                    .map_err(|_| Error::ReportMismatch(format!("bad run count in {}", path.display())))?,
            });
        }
        Ok(Aggregate { label, rows })
    }

    /// Markdown table with one `mean ± std` row per metric.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("| Metric | {} |\n|---|---|\n", self.label);
        for r in &self.rows {
            let _ = writeln!(out, "| {} | {} |", r.metric, mean_std(r));
        }
        out
    }
}

fn mean_std(r: &AggregateRow) -> String {
    match (r.mean, r.std) {
        (Some(m), Some(s)) => format!("{m:.2} ± {s:.2}"),
        _ => "undefined".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub metric: String,
    pub a: AggregateRow,
    pub b: AggregateRow,
    /// `100 · (mean_a − mean_b) / mean_b`; `None` when undefined.
    pub relative_change: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaTable {
    pub label_a: String,
    pub label_b: String,
    pub rows: Vec<DeltaRow>,
}

pub fn relative_change(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| 100.0 * (a - b) / b)
}

/// Per-metric relative change of `a` against the baseline `b`.
pub fn compare(a: &Aggregate, b: &Aggregate) -> Result<DeltaTable> {
    let names_a: Vec<&str> = a.rows.iter().map(|r| r.metric.as_str()).collect();
    let names_b: Vec<&str> = b.rows.iter().map(|r| r.metric.as_str()).collect();
    if names_a != names_b {
        return Err(Error::ReportMismatch(format!(
            "metric sets differ: {names_a:?} vs {names_b:?}"
        )));
    }
    let rows = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| DeltaRow {
            metric: ra.metric.clone(),
            a: ra.clone(),
            b: rb.clone(),
            relative_change: match (ra.mean, rb.mean) {
                (Some(x), Some(y)) => relative_change(x, y),
                _ => None,
            },
        })
        .collect();
    Ok(DeltaTable {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        rows,
    })
}

impl DeltaTable {
    /// Baseline column first; the compared column carries the relative change.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("| Metric | {} | {} |\n|---|---|---|\n", self.label_b, self.label_a);
        for r in &self.rows {
            let delta = r
                .relative_change
                .map_or_else(|| "(undefined)".to_string(), |d| format!("({d:+.2}%)"));
            let _ = writeln!(
                out,
                "| {} | {} | {} {delta} |",
                r.metric,
                mean_std(&r.b),
                mean_std(&r.a)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,mean_a,std_a,mean_b,std_b,relative_change\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.metric,
                cell(r.a.mean),
                cell(r.a.std),
                cell(r.b.mean),
                cell(r.b.std),
                cell(r.relative_change)
            );
        }
        out
    }
}
