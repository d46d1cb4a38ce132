use std::fmt;

use serde::{Deserialize, Serialize};

use crate::stream::instance::Bit;

/// A metric value in percent, with explicit handling of empty denominators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Metric {
    Defined(f64),
    /// At least one contributing rate had a zero denominator and entered as 0.
    Partial(f64),
    Undefined,
}

impl Metric {
    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Defined(v) | Metric::Partial(v) => Some(v),
            Metric::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Metric::Defined(_))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Defined(v) => write!(f, "{v:.2}"),
            Metric::Partial(v) => write!(f, "{v:.2}*"),
            Metric::Undefined => f.write_str("undefined"),
        }
    }
}

/// Ratio with the zero-denominator convention: `(value, denominator_was_zero)`.
pub(crate) fn rate(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Running confusion counts of the prequential evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrequentialLedger {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    pub n_seen: u64,
}

impl PrequentialLedger {
    pub fn from_counts(tp: u64, fn_: u64, tn: u64, fp: u64) -> Self {
        PrequentialLedger {
            tp,
            fp,
            tn,
            fn_,
            n_seen: tp + fp + tn + fn_,
        }
    }

    pub fn record(&mut self, truth: Bit, predicted: Bit) {
        match (truth, predicted) {
            (1, 1) => self.tp += 1,
            (1, _) => self.fn_ += 1,
            (_, 1) => self.fp += 1,
            _ => self.tn += 1,
        }
        self.n_seen += 1;
    }

    fn tpr(&self) -> (f64, bool) {
        rate(self.tp, self.tp + self.fn_)
    }

    fn tnr(&self) -> (f64, bool) {
        rate(self.tn, self.tn + self.fp)
    }

    fn combine(&self, value: f64, partial: bool) -> Metric {
        if self.n_seen == 0 {
            Metric::Undefined
        } else if partial {
            Metric::Partial(value)
        } else {
            Metric::Defined(value)
        }
    }

    pub fn accuracy(&self) -> Metric {
        let (acc, _) = rate(self.tp + self.tn, self.n_seen);
        self.combine(100.0 * acc, false)
    }

    pub fn balanced_accuracy(&self) -> Metric {
        let (tpr, p1) = self.tpr();
        let (tnr, p2) = self.tnr();
        self.combine(100.0 * (tpr + tnr) / 2.0, p1 || p2)
    }

    pub fn recall(&self) -> Metric {
        let (tpr, p) = self.tpr();
        self.combine(100.0 * tpr, p)
    }

    pub fn geometric_mean(&self) -> Metric {
        let (tpr, p1) = self.tpr();
        let (tnr, p2) = self.tnr();
        self.combine(100.0 * (tpr * tnr).sqrt(), p1 || p2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(m: Metric, expected: f64) {
        let v = m.value().expect("defined");
        assert!((v - expected).abs() < 1e-9, "{v} vs {expected}");
    }

    #[test]
    fn balanced_accuracy_examples() {
        close(PrequentialLedger::from_counts(3, 0, 7, 0).balanced_accuracy(), 100.0);
        close(PrequentialLedger::from_counts(1, 1, 3, 1).balanced_accuracy(), 62.5);
        close(PrequentialLedger::from_counts(0, 5, 5, 0).balanced_accuracy(), 50.0);
    }

    #[test]
    fn recall_gmean_accuracy_examples() {
        let l = PrequentialLedger::from_counts(1, 1, 3, 1);
        close(l.recall(), 50.0);
        close(l.geometric_mean(), 100.0 * (0.5f64 * 0.75).sqrt());
        assert!((l.geometric_mean().value().unwrap() - 61.237).abs() < 1e-3);

        let perfect = PrequentialLedger::from_counts(4, 0, 6, 0);
        close(perfect.recall(), 100.0);
        close(perfect.geometric_mean(), 100.0);
        close(perfect.accuracy(), 100.0);

        let missed = PrequentialLedger::from_counts(0, 3, 2, 1);
        close(missed.recall(), 0.0);
        close(missed.geometric_mean(), 0.0);
    }

    #[test]
    fn zero_denominators_are_partial() {
        let no_positives = PrequentialLedger::from_counts(0, 0, 5, 0);
        assert_eq!(no_positives.balanced_accuracy(), Metric::Partial(50.0));
        assert_eq!(no_positives.recall(), Metric::Partial(0.0));
        assert!(no_positives.accuracy().is_defined());
        assert_eq!(PrequentialLedger::default().accuracy(), Metric::Undefined);
        assert_eq!(PrequentialLedger::default().balanced_accuracy(), Metric::Undefined);
    }

    #[test]
    fn record_conserves_counts() {
        let mut l = PrequentialLedger::default();
        for (y, p) in [(0, 0), (0, 1), (1, 0), (1, 1), (1, 1)] {
            l.record(y, p);
        }
        assert_eq!(l, PrequentialLedger::from_counts(2, 1, 1, 1));
    }
}
