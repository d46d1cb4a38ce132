//! ADWIN adaptive-windowing change detector.
//!
//! The window is summarised by an exponential histogram: row `i` holds up to
//! `max_buckets` buckets of `2^i` elements each, newer elements living in
//! lower rows. Every `clock` insertions the detector scans each bucket
//! boundary, splitting the window into an older part `W0` (`n0` elements,
//! mean `μ0`) and a newer part `W1` (`n1`, `μ1`), and drops the oldest bucket
//! while some split satisfies `|μ0 − μ1| > ε_cut` with
//!
//! ```text
//! m     = 1 / (n0 − L + 1) + 1 / (n1 − L + 1)     (L = min_window_length)
//! δ'    = ln(2 · ln(n) / δ)                        (n = n0 + n1)
//! ε_cut = sqrt(2 · m · σ² · δ') + (2/3) · m · δ'
//! ```
//!
//! where `σ²` is the variance of the whole window.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.002;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdwinParams {
    pub delta: f64,
    /// Buckets kept per exponent row before two are merged.
    pub max_buckets: usize,
    /// Cut checks run once every `clock` insertions.
    pub clock: u64,
    pub min_window_length: usize,
    /// No checks until the window holds this many elements.
    pub grace_period: usize,
}

impl Default for AdwinParams {
    fn default() -> Self {
        AdwinParams {
            delta: DEFAULT_DELTA,
            max_buckets: 5,
            clock: 32,
            min_window_length: 5,
            grace_period: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct Bucket {
    sum: f64,
    /// Sum of squared deviations from the bucket mean.
    m2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adwin {
    params: AdwinParams,
    /// `rows[i]` holds buckets of `2^i` elements, oldest at the front.
    rows: Vec<VecDeque<Bucket>>,
    width: usize,
    total: f64,
    m2: f64,
    n_added: u64,
    n_detections: u64,
    last_drift_at: Option<u64>,
}

impl Default for Adwin {
    fn default() -> Self {
        Adwin::with_params(AdwinParams::default()).expect("default params are valid")
    }
}

impl Adwin {
    pub fn new(delta: f64) -> Result<Self> {
        Adwin::with_params(AdwinParams {
            delta,
            ..AdwinParams::default()
        })
    }

    pub fn with_params(params: AdwinParams) -> Result<Self> {
        if !(params.delta > 0.0 && params.delta < 1.0) {
            return Err(Error::param("delta", format!("{} not in (0, 1)", params.delta)));
        }
        if params.max_buckets < 2 {
            return Err(Error::param("max_buckets", "must be at least 2"));
        }
        if params.clock == 0 {
            return Err(Error::param("clock", "must be positive"));
        }
        Ok(Adwin {
            params,
            rows: Vec::new(),
            width: 0,
            total: 0.0,
            m2: 0.0,
            n_added: 0,
            n_detections: 0,
            last_drift_at: None,
        })
    }

    pub fn params(&self) -> &AdwinParams {
        &self.params
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn estimated_mean(&self) -> Option<f64> {
        (self.width > 0).then(|| self.total / self.width as f64)
    }

    pub fn variance(&self) -> Option<f64> {
        (self.width > 0).then(|| self.m2 / self.width as f64)
    }

    /// Number of exponent rows currently in use.
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_buckets(&self) -> usize {
        self.rows.iter().map(VecDeque::len).sum()
    }

    /// Elements added since creation or the last reset.
    pub fn n_added(&self) -> u64 {
        self.n_added
    }

    pub fn n_detections(&self) -> u64 {
        self.n_detections
    }

    /// Insertion index (0-based) of the element whose arrival triggered the most recent cut.
    pub fn last_drift_at(&self) -> Option<u64> {
        self.last_drift_at
    }

    pub fn reset(&mut self) {
        *self = Adwin::with_params(self.params).expect("params were validated");
    }

    /// Appends `value` and returns whether the window was cut.
    pub fn add_element(&mut self, value: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfBounds { value });
        }
        Ok(self.insert(value))
    }

    fn insert(&mut self, value: f64) -> bool {
        if self.width > 0 {
            let mean = self.total / self.width as f64;
            let n = self.width as f64;
            self.m2 += n * (value - mean).powi(2) / (n + 1.0);
        }
        self.width += 1;
        self.total += value;
        if self.rows.is_empty() {
            self.rows.push(VecDeque::new());
        }
        self.rows[0].push_back(Bucket { sum: value, m2: 0.0 });
        self.compress();
        self.n_added += 1;

        let drift =
            self.n_added.is_multiple_of(self.params.clock) && self.width > self.params.grace_period && self.detect();
        if drift {
            self.n_detections += 1;
            self.last_drift_at = Some(self.n_added - 1);
        }
        drift
    }

    fn compress(&mut self) {
        let mut row = 0;
        while row < self.rows.len() && self.rows[row].len() > self.params.max_buckets {
            let size = (1u64 << row) as f64;
            let a = self.rows[row].pop_front().expect("row over capacity");
            let b = self.rows[row].pop_front().expect("row over capacity");
            let delta = a.sum / size - b.sum / size;
            let merged = Bucket {
                sum: a.sum + b.sum,
                m2: a.m2 + b.m2 + size * size * delta * delta / (2.0 * size),
            };
            if row + 1 == self.rows.len() {
                self.rows.push(VecDeque::new());
            }
            self.rows[row + 1].push_back(merged);
            row += 1;
        }
    }

    /// Buckets from oldest to newest with their element counts.
    fn buckets_oldest_first(&self) -> impl Iterator<Item = (usize, &Bucket)> {
        self.rows
            .iter()
            .enumerate()
            .rev()
            .flat_map(|(i, row)| row.iter().map(move |b| (1usize << i, b)))
    }

    fn detect(&mut self) -> bool {
        let mut cut_any = false;
        while self.width > self.params.grace_period && self.has_cut() {
            self.drop_oldest_bucket();
            cut_any = true;
        }
        cut_any
    }

    fn has_cut(&self) -> bool {
        let n = self.width as f64;
        let variance = self.m2 / n;
        let dd = (2.0 * n.ln() / self.params.delta).ln();
        let l = self.params.min_window_length as f64;
        let mut n0 = 0usize;
        let mut sum0 = 0.0;
        let n_buckets = self.n_buckets();
        for (idx, (count, bucket)) in self.buckets_oldest_first().enumerate() {
            // The newest bucket would leave W1 empty.
            if idx + 1 == n_buckets {
                break;
            }
            n0 += count;
            sum0 += bucket.sum;
            let n1 = self.width - n0;
            if n0 < self.params.min_window_length || n1 < self.params.min_window_length {
                continue;
            }
            let mean0 = sum0 / n0 as f64;
            let mean1 = (self.total - sum0) / n1 as f64;
            let m = 1.0 / (n0 as f64 - l + 1.0) + 1.0 / (n1 as f64 - l + 1.0);
            let eps = (2.0 * m * variance * dd).sqrt() + 2.0 / 3.0 * dd * m;
            if (mean0 - mean1).abs() > eps {
                return true;
            }
        }
        false
    }

    fn drop_oldest_bucket(&mut self) {
        let row = self.rows.len() - 1;
        let bucket = self.rows[row].pop_front().expect("non-empty window");
        let count = 1usize << row;
        if self.rows[row].is_empty() {
            self.rows.pop();
        }
        let n_before = self.width as f64;
        self.width -= count;
        let rest_sum = self.total - bucket.sum;
        if self.width == 0 {
            self.total = 0.0;
            self.m2 = 0.0;
            return;
        }
        let n_rest = self.width as f64;
        let gap = rest_sum / n_rest - bucket.sum / count as f64;
        self.m2 -= bucket.m2 + n_rest * count as f64 * gap * gap / n_before;
        self.m2 = self.m2.max(0.0);
        self.total = rest_sum;
    }
}
