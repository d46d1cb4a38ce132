//! SMOTE primitives: scale-free mixed-type distance, brute-force kNN, and
//! seed/neighbour interpolation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::stream::AttributeKind;

/// Per-feature standard deviations below this contribute nothing to distances.
pub const MIN_STD: f64 = 1e-12;

/// Running mean and standard deviation of numeric features over the natural
/// samples currently in the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScales {
    numeric: Vec<bool>,
    count: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl FeatureScales {
    pub fn new(kinds: &[AttributeKind]) -> Self {
        FeatureScales {
            numeric: kinds.iter().map(|k| *k == AttributeKind::Numeric).collect(),
            count: 0.0,
            sum: vec![0.0; kinds.len()],
            sum_sq: vec![0.0; kinds.len()],
        }
    }

    pub fn add(&mut self, features: &[f64]) {
        self.count += 1.0;
        for (i, &v) in features.iter().enumerate() {
            if self.numeric[i] {
                self.sum[i] += v;
                self.sum_sq[i] += v * v;
            }
        }
    }

    pub fn rebuild<'a>(&mut self, samples: impl Iterator<Item = &'a crate::stream::Instance>) {
        self.count = 0.0;
        self.sum.iter_mut().for_each(|s| *s = 0.0);
        self.sum_sq.iter_mut().for_each(|s| *s = 0.0);
        for x in samples {
            self.add(&x.features);
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        if self.count == 0.0 {
            0.0
        } else {
            self.sum[i] / self.count
        }
    }

    pub fn std_dev(&self, i: usize) -> f64 {
        if self.count == 0.0 {
            return 0.0;
        }
        let mean = self.sum[i] / self.count;
        (self.sum_sq[i] / self.count - mean * mean).max(0.0).sqrt()
    }

    /// Multipliers turning raw numeric differences into standardised ones;
    /// `0` for categoricals and near-constant features.
    pub fn inverse_std(&self) -> Vec<f64> {
        (0..self.numeric.len())
            .map(|i| {
                let sd = self.std_dev(i);
                if self.numeric[i] && sd >= MIN_STD {
                    1.0 / sd
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Squared distance: standardised Euclidean over numerics plus one per
/// mismatching categorical.
pub fn squared_distance(a: &[f64], b: &[f64], kinds: &[AttributeKind], inverse_std: &[f64]) -> f64 {
    let mut d = 0.0;
    for i in 0..a.len() {
        match kinds[i] {
            AttributeKind::Numeric => {
                let z = (a[i] - b[i]) * inverse_std[i];
                d += z * z;
            }
            AttributeKind::Categorical { .. } => {
                if a[i] != b[i] {
                    d += 1.0;
                }
            }
        }
    }
    d
}

/// Positions of the `k` nearest candidates to `query`, excluding the
/// candidate at `exclude`. Closer first; equal distances keep candidate order.
pub fn nearest_neighbors<'a>(
    candidates: impl Iterator<Item = &'a [f64]>,
    exclude: usize,
    query: &[f64],
    k: usize,
    kinds: &[AttributeKind],
    scales: &FeatureScales,
) -> Vec<usize> {
    let inverse_std = scales.inverse_std();
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (pos, c) in candidates.enumerate() {
        if pos == exclude {
            continue;
        }
        let d = squared_distance(query, c, kinds, &inverse_std);
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let at = best.partition_point(|&(bd, _)| bd <= d);
        best.insert(at, (d, pos));
        best.truncate(k);
    }
    best.into_iter().map(|(_, p)| p).collect()
}

/// Numeric features: `seed + u · (neighbour − seed)`, one `u ~ U[0, 1)` per
/// feature. Categorical features: seed's or neighbour's value with equal odds.
pub fn interpolate<R: Rng + ?Sized>(seed: &[f64], neighbor: &[f64], kinds: &[AttributeKind], rng: &mut R) -> Vec<f64> {
    seed.iter()
        .zip(neighbor)
        .zip(kinds)
        .map(|((&s, &n), kind)| match kind {
            AttributeKind::Numeric => {
                let u: f64 = rng.random();
                (s + u * (n - s)).clamp(s.min(n), s.max(n))
            }
            AttributeKind::Categorical { .. } => {
                if rng.random_bool(0.5) {
                    s
                } else {
                    n
                }
            }
        })
        .collect()
}
