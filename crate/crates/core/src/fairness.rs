//! Streaming group and individual fairness trackers.
//!
//! All group metrics are cumulative over the stream and computed from a
//! single [`GroupConfusionLedger`]. Values are percentages; smaller means
//! less measured discrimination. Group 1 is the privileged group.

use serde::{Deserialize, Serialize};

use crate::stream::instance::Bit;
use crate::stream::metrics::Metric;

/// Fixed metric names used in reports.
pub const STATISTICAL_PARITY: &str = "statistical_parity";
pub const DISPARATE_IMPACT: &str = "disparate_impact";
pub const DISPARATE_IMPACT_SYMMETRIC: &str = "disparate_impact_symmetric";
pub const EQUAL_OPPORTUNITY: &str = "equal_opportunity";
pub const EQUAL_FPR: &str = "equal_fpr";
pub const INDIVIDUAL_FAIRNESS: &str = "individual_fairness";

/// Counts indexed by `[sensitive][true label][predicted label]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfusionLedger {
    counts: [[[u64; 2]; 2]; 2],
}

impl GroupConfusionLedger {
    pub fn record(&mut self, sensitive: Bit, truth: Bit, predicted: Bit) {
        self.counts[usize::from(sensitive)][usize::from(truth)][usize::from(predicted)] += 1;
    }

    pub fn count(&self, sensitive: Bit, truth: Bit, predicted: Bit) -> u64 {
        self.counts[usize::from(sensitive)][usize::from(truth)][usize::from(predicted)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().sum()
    }

    pub fn group_size(&self, sensitive: Bit) -> u64 {
        self.counts[usize::from(sensitive)].iter().flatten().sum()
    }

    /// `P̂[ŷ = 1 | S = s]`, or `None` for an empty group.
    pub fn positive_rate(&self, sensitive: Bit) -> Option<f64> {
        let g = &self.counts[usize::from(sensitive)];
        let n = self.group_size(sensitive);
        (n > 0).then(|| (g[0][1] + g[1][1]) as f64 / n as f64)
    }

    /// `P̂[ŷ = 1 | S = s, y = y]`, or `None` for an empty cell.
    pub fn conditional_positive_rate(&self, sensitive: Bit, truth: Bit) -> Option<f64> {
        let cell = self.counts[usize::from(sensitive)][usize::from(truth)];
        let n = cell[0] + cell[1];
        (n > 0).then(|| cell[1] as f64 / n as f64)
    }

    /// Copy with the roles of the two groups exchanged.
    pub fn swapped_groups(&self) -> Self {
        GroupConfusionLedger {
            counts: [self.counts[1], self.counts[0]],
        }
    }

    fn abs_gap(a: Option<f64>, b: Option<f64>) -> Metric {
        match (a, b) {
            (Some(a), Some(b)) => Metric::Defined(100.0 * (a - b).abs()),
            _ => Metric::Undefined,
        }
    }

    pub fn statistical_parity(&self) -> Metric {
        Self::abs_gap(self.positive_rate(1), self.positive_rate(0))
    }

    /// `100 · (1 − P̂[ŷ=1|S=0] / P̂[ŷ=1|S=1])`; negative when the unprivileged
    /// group receives more positive predictions.
    pub fn disparate_impact(&self) -> Metric {
        match (self.positive_rate(1), self.positive_rate(0)) {
            (Some(privileged), Some(unprivileged)) if privileged > 0.0 => {
                Metric::Defined(100.0 * (1.0 - unprivileged / privileged))
            }
            (Some(_), Some(unprivileged)) => {
                if unprivileged > 0.0 {
                    tracing::debug!(
                        unprivileged,
                        "disparate impact undefined: privileged group has no positive predictions"
                    );
                }
                Metric::Undefined
            }
            _ => Metric::Undefined,
        }
    }

    /// `100 · |1 − min(r0/r1, r1/r0)|`. Not part of the reference metric set;
    /// reported for comparison with work that uses the symmetric form.
    pub fn disparate_impact_symmetric(&self) -> Metric {
        match (self.positive_rate(1), self.positive_rate(0)) {
            (Some(r1), Some(r0)) if r1 > 0.0 && r0 > 0.0 => {
                Metric::Defined(100.0 * (1.0 - (r0 / r1).min(r1 / r0)).abs())
            }
            (Some(r1), Some(r0)) if r1 == 0.0 && r0 == 0.0 => Metric::Defined(0.0),
            _ => Metric::Undefined,
        }
    }

    pub fn equal_opportunity(&self) -> Metric {
        Self::abs_gap(
            self.conditional_positive_rate(1, 1),
            self.conditional_positive_rate(0, 1),
        )
    }

    pub fn equal_fpr(&self) -> Metric {
        Self::abs_gap(
            self.conditional_positive_rate(1, 0),
            self.conditional_positive_rate(0, 0),
        )
    }
}

/// Tally of counterfactual prediction flips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipLedger {
    pub flips: u64,
    pub evaluated: u64,
}

impl FlipLedger {
    pub fn record(&mut self, flipped: bool) {
        self.evaluated += 1;
        self.flips += u64::from(flipped);
    }

    pub fn individual_fairness(&self) -> Metric {
        if self.evaluated == 0 {
            Metric::Undefined
        } else {
            Metric::Defined(100.0 * self.flips as f64 / self.evaluated as f64)
        }
    }
}
