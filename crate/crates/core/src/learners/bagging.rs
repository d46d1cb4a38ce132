use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::learners::Classifier;
use crate::stream::{Bit, Instance};

/// Oza online bagging: every member sees each instance `k ~ Poisson(1)` times.
///
/// Prediction is a majority vote with ties going to label 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineBagging<C> {
    members: Vec<C>,
    rngs: Vec<ChaCha8Rng>,
}

/// Random stream of member `index` in an ensemble seeded with `seed`.
pub fn member_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Number of copies of the current instance shown to one member.
pub fn poisson_weight(rng: &mut ChaCha8Rng, lambda: f64) -> u32 {
    Poisson::new(lambda).expect("positive rate").sample(rng) as u32
}

impl<C: Classifier + Clone> OnlineBagging<C> {
    pub fn new(template: C, size: usize, seed: u64) -> Self {
        assert!(size >= 1, "ensemble needs at least one member");
        OnlineBagging {
            members: vec![template; size],
            rngs: (0..size).map(|i| member_rng(seed, i)).collect(),
        }
    }

    pub fn members(&self) -> &[C] {
        &self.members
    }

    /// Positive votes for `x`.
    pub fn votes(&self, x: &Instance) -> usize {
        self.members.iter().filter(|m| m.predict_one(x) == 1).count()
    }
}

impl<C: Classifier + Clone> Classifier for OnlineBagging<C> {
    fn learn_weighted(&mut self, x: &Instance, weight: u32) {
        if weight == 0 {
            return;
        }
        for (member, rng) in self.members.iter_mut().zip(&mut self.rngs) {
            let k = poisson_weight(rng, f64::from(weight));
            if k > 0 {
                member.learn_weighted(x, k);
            }
        }
    }

    fn predict_proba(&self, x: &Instance) -> f64 {
        self.votes(x) as f64 / self.members.len() as f64
    }

    fn predict_one(&self, x: &Instance) -> Bit {
        Bit::from(2 * self.votes(x) > self.members.len())
    }

    fn has_learned(&self) -> bool {
        self.members.iter().any(Classifier::has_learned)
    }

    fn resets(&self) -> u64 {
        self.members.iter().map(Classifier::resets).sum()
    }
}
