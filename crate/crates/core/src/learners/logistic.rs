use serde::{Deserialize, Serialize};

use crate::learners::Classifier;
use crate::stream::{AttributeKind, Instance, StreamSchema};

/// Online logistic regression trained by SGD.
///
/// Numeric features are standardised with running statistics; categorical
/// features are one-hot encoded. Used as an optional separate judge model for
/// situation testing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineLogistic {
    kinds: Vec<AttributeKind>,
    /// Offset of each attribute's first weight.
    offsets: Vec<usize>,
    weights: Vec<f64>,
    bias: f64,
    learning_rate: f64,
    l2: f64,
    /// Running `(count, mean, m2)` per attribute; unused for categoricals.
    stats: Vec<(f64, f64, f64)>,
    seen: f64,
}

impl OnlineLogistic {
    pub fn new(schema: &StreamSchema, learning_rate: f64) -> Self {
        let kinds: Vec<AttributeKind> = schema.attributes().iter().map(|a| a.kind).collect();
        let mut offsets = Vec::with_capacity(kinds.len());
        let mut width = 0;
        for k in &kinds {
            offsets.push(width);
            width += match k {
                AttributeKind::Numeric => 1,
                AttributeKind::Categorical { arity } => *arity,
            };
        }
        OnlineLogistic {
            stats: vec![(0.0, 0.0, 0.0); kinds.len()],
            kinds,
            offsets,
            weights: vec![0.0; width],
            bias: 0.0,
            learning_rate,
            l2: 1e-5,
            seen: 0.0,
        }
    }

    fn scaled(&self, attr: usize, v: f64) -> f64 {
        let (n, mean, m2) = self.stats[attr];
        if n < 2.0 {
            return 0.0;
        }
        let sd = (m2 / (n - 1.0)).sqrt();
        if sd < 1e-12 {
            0.0
        } else {
            (v - mean) / sd
        }
    }

    /// Active `(weight index, feature value)` pairs.
    fn encode(&self, x: &Instance) -> Vec<(usize, f64)> {
        self.kinds
            .iter()
            .enumerate()
            .map(|(a, k)| match k {
                AttributeKind::Numeric => (self.offsets[a], self.scaled(a, x.features[a])),
                AttributeKind::Categorical { .. } => (self.offsets[a] + x.features[a] as usize, 1.0),
            })
            .collect()
    }

    fn score(&self, encoded: &[(usize, f64)]) -> f64 {
        let z = self.bias + encoded.iter().map(|&(i, v)| self.weights[i] * v).sum::<f64>();
        1.0 / (1.0 + (-z).exp())
    }
}

impl Classifier for OnlineLogistic {
    fn learn_weighted(&mut self, x: &Instance, weight: u32) {
        if weight == 0 {
            return;
        }
        for (a, k) in self.kinds.iter().enumerate() {
            if *k == AttributeKind::Numeric {
                let (n, mean, m2) = &mut self.stats[a];
                *n += 1.0;
                let d = x.features[a] - *mean;
                *mean += d / *n;
                *m2 += d * (x.features[a] - *mean);
            }
        }
        let encoded = self.encode(x);
        let gradient = (self.score(&encoded) - f64::from(x.label)) * f64::from(weight);
        let lr = self.learning_rate;
        for &(i, v) in &encoded {
            self.weights[i] -= lr * (gradient * v + self.l2 * self.weights[i]);
        }
        self.bias -= lr * gradient;
        self.seen += f64::from(weight);
    }

    fn predict_proba(&self, x: &Instance) -> f64 {
        if self.seen == 0.0 {
            return 0.0;
        }
        self.score(&self.encode(x))
    }

    fn has_learned(&self) -> bool {
        self.seen > 0.0
    }
}
