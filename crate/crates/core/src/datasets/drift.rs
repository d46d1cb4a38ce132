use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{Bit, Instance, StreamSchema};

/// Parameters of a synthetic stream with group-dependent positive rates.
///
/// Features are `x ~ U[0, 1]^n_features` followed by the sensitive bit. In
/// segment `k` (segments are separated by `drift_points`) the label is
/// `x[k mod n_features] < r_s` for even `k` and `x[k mod n_features] > 1 - r_s`
/// for odd `k`, so `P(y = 1 | s) = r_s` exactly. `r_s` is the segment's
/// positive rate shifted by `+gap/2` for the privileged group and `-gap/2`
/// otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftStreamParams {
    pub n: usize,
    pub n_features: usize,
    /// One rate for every segment, or one per segment.
    pub positive_rates: Vec<f64>,
    pub privileged_rate: f64,
    pub group_positive_gap: f64,
    /// Strictly increasing sample indices where the next segment starts.
    pub drift_points: Vec<usize>,
    pub seed: u64,
}

impl Default for DriftStreamParams {
    fn default() -> Self {
        DriftStreamParams {
            n: 10_000,
            n_features: 3,
            positive_rates: vec![0.25],
            privileged_rate: 0.6,
            group_positive_gap: 0.0,
            drift_points: Vec::new(),
            seed: 0,
        }
    }
}

impl DriftStreamParams {
    pub fn schema(&self) -> StreamSchema {
        StreamSchema::numeric_with_sensitive(self.n_features)
    }

    pub fn segment_at(&self, t: usize) -> usize {
        self.drift_points.partition_point(|&d| d <= t)
    }

    /// Positive rate of group `s` in `segment`.
    pub fn group_rate(&self, segment: usize, s: Bit) -> f64 {
        let base = self.positive_rates[segment.min(self.positive_rates.len() - 1)];
        let half = self.group_positive_gap / 2.0;
        if s == 1 {
            base + half
        } else {
            base - half
        }
    }

    /// Label the concept of `segment` assigns to `features` (sensitive last).
    pub fn concept_label(&self, segment: usize, features: &[f64]) -> Bit {
        let s = features[self.n_features] as Bit;
        let r = self.group_rate(segment, s);
        let v = features[segment % self.n_features];
        Bit::from(if segment.is_multiple_of(2) { v < r } else { v > 1.0 - r })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InfeasibleStream(m));
        if self.n_features == 0 {
            return fail("need at least one feature".into());
        }
        if !(0.0..=1.0).contains(&self.privileged_rate) {
            return fail(format!("privileged rate {} outside [0, 1]", self.privileged_rate));
        }
        let segments = self.drift_points.len() + 1;
        if self.positive_rates.len() != 1 && self.positive_rates.len() != segments {
            return fail(format!(
                "{} positive rates for {segments} segments",
                self.positive_rates.len()
            ));
        }
        if self.drift_points.windows(2).any(|w| w[0] >= w[1]) {
            return fail("drift points must be strictly increasing".into());
        }
        if self.drift_points.last().is_some_and(|&d| d >= self.n) {
            return fail("drift points must lie inside the stream".into());
        }
        for segment in 0..segments {
            for s in [0, 1] {
                let r = self.group_rate(segment, s);
                if !(0.0..=1.0).contains(&r) {
                    return fail(format!(
                        "segment {segment}: rate {} with gap {} gives {r} for s = {s}",
                        self.positive_rates[segment.min(self.positive_rates.len() - 1)],
                        self.group_positive_gap
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn generate_biased_drift_stream(params: &DriftStreamParams) -> Result<Vec<Instance>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut out = Vec::with_capacity(params.n);
    for t in 0..params.n {
        let s = Bit::from(rng.random_bool(params.privileged_rate));
        let mut features: Vec<f64> = (0..params.n_features).map(|_| rng.random()).collect();
        features.push(f64::from(s));
        let y = params.concept_label(params.segment_at(t), &features);
        out.push(Instance::new(features, y, s));
    }
    Ok(out)
}
