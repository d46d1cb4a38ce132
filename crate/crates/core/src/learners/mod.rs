//! Incremental binary classifiers.

pub mod adaptive;
pub mod bagging;
pub mod hoeffding;
pub mod logistic;

use serde::{Deserialize, Serialize};

use crate::stream::{Bit, Instance};

pub use adaptive::AdaptiveReset;
pub use bagging::OnlineBagging;
pub use hoeffding::{hoeffding_bound, HoeffdingTree, HoeffdingTreeParams, LeafPrediction, SplitDecision};
pub use logistic::OnlineLogistic;

/// Uniform interface over stream classifiers.
///
/// `predict_*` must never mutate state, and `learn_*` must not depend on a
/// prior prediction call.
pub trait Classifier {
    /// Trains on `x` as if it had been seen `weight` times.
    fn learn_weighted(&mut self, x: &Instance, weight: u32);

    fn learn_one(&mut self, x: &Instance) {
        self.learn_weighted(x, 1);
    }

    /// Score for the positive class in `[0, 1]`.
    fn predict_proba(&self, x: &Instance) -> f64;

    /// Positive iff the score exceeds 0.5; an untrained model predicts 0.
    fn predict_one(&self, x: &Instance) -> Bit {
        Bit::from(self.predict_proba(x) > 0.5)
    }

    /// Whether the model has been trained on at least one sample since
    /// creation or its last reset.
    fn has_learned(&self) -> bool;

    /// Number of drift resets performed so far.
    fn resets(&self) -> u64 {
        0
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn learn_weighted(&mut self, x: &Instance, weight: u32) {
        (**self).learn_weighted(x, weight)
    }
    fn learn_one(&mut self, x: &Instance) {
        (**self).learn_one(x)
    }
    fn predict_proba(&self, x: &Instance) -> f64 {
        (**self).predict_proba(x)
    }
    fn predict_one(&self, x: &Instance) -> Bit {
        (**self).predict_one(x)
    }
    fn has_learned(&self) -> bool {
        (**self).has_learned()
    }
    fn resets(&self) -> u64 {
        (**self).resets()
    }
}

/// Always predicts the same label and ignores training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantClassifier(pub Bit);

impl Classifier for ConstantClassifier {
    fn learn_weighted(&mut self, _: &Instance, _: u32) {}

    fn predict_proba(&self, _: &Instance) -> f64 {
        f64::from(self.0)
    }

    fn has_learned(&self) -> bool {
        false
    }
}

/// Predicts the most frequent label seen so far (ties and cold start: 0).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MajorityClass {
    counts: [f64; 2],
}

impl Classifier for MajorityClass {
    fn learn_weighted(&mut self, x: &Instance, weight: u32) {
        self.counts[usize::from(x.label)] += f64::from(weight);
    }

    fn predict_proba(&self, _: &Instance) -> f64 {
        let total = self.counts[0] + self.counts[1];
        if total == 0.0 {
            0.0
        } else {
            self.counts[1] / total
        }
    }

    fn has_learned(&self) -> bool {
        self.counts[0] + self.counts[1] > 0.0
    }
}
