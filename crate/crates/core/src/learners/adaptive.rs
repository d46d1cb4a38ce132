use serde::{Deserialize, Serialize};

use crate::adwin::Adwin;
use crate::learners::Classifier;
use crate::stream::{Bit, Instance};

/// Wraps a classifier with an ADWIN monitor on its prequential 0/1 error and
/// replaces it with a fresh copy when the monitored error rises.
///
/// Detected drifts where the error went down (the model is still improving)
/// do not trigger a reset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveReset<C> {
    template: C,
    inner: C,
    detector: Adwin,
    resets: u64,
}

impl<C: Classifier + Clone> AdaptiveReset<C> {
    /// `fresh` must be untrained; it is cloned on every reset.
    pub fn new(fresh: C, detector: Adwin) -> Self {
        AdaptiveReset {
            inner: fresh.clone(),
            template: fresh,
            detector,
            resets: 0,
        }
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }

    pub fn detector(&self) -> &Adwin {
        &self.detector
    }

    fn reset(&mut self) {
        self.inner = self.template.clone();
        self.detector.reset();
        self.resets += 1;
    }
}

impl<C: Classifier + Clone> Classifier for AdaptiveReset<C> {
    fn learn_weighted(&mut self, x: &Instance, weight: u32) {
        let error = f64::from(u8::from(self.inner.predict_one(x) != x.label));
        let mean_before = self.detector.estimated_mean();
        let drift = self.detector.add_element(error).expect("0/1 error is within bounds");
        if drift {
            let rose = match (mean_before, self.detector.estimated_mean()) {
                (Some(before), Some(after)) => after > before,
                _ => false,
            };
            if rose {
                self.reset();
            }
        }
        self.inner.learn_weighted(x, weight);
    }

    fn predict_proba(&self, x: &Instance) -> f64 {
        self.inner.predict_proba(x)
    }

    fn predict_one(&self, x: &Instance) -> Bit {
        self.inner.predict_one(x)
    }

    fn has_learned(&self) -> bool {
        self.inner.has_learned()
    }

    fn resets(&self) -> u64 {
        self.resets + self.inner.resets()
    }
}
