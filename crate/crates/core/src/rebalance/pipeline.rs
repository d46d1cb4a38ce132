use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adwin::Adwin;
use crate::error::Result;
use crate::learners::{Classifier, OnlineLogistic};
use crate::rebalance::window::SubgroupWindow;
use crate::rebalance::{Mode, RebalancerConfig};
use crate::stream::{Bit, Instance, Pipeline, StepOutcome, StreamSchema};

/// Model used to judge situation tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judge {
    /// The live base learner.
    Learner,
    /// A separate online logistic regression trained on every natural sample.
    Proxy,
}

/// Keeps `x` iff `model` predicts the same label for `x` and for its
/// sensitive-flipped counterfactual. A model that has not learned anything yet
/// keeps everything.
pub fn situation_test<C: Classifier + ?Sized>(x: &Instance, model: &C, schema: &StreamSchema) -> bool {
    if !model.has_learned() {
        return true;
    }
    model.predict_one(x) == model.predict_one(&x.counterfactual(schema))
}

/// CFSMOTE or C-SMOTE pre-processor wrapped around a base learner.
#[derive(Clone, Debug, Serialize)]
pub struct Rebalancer<C> {
    config: RebalancerConfig,
    schema: StreamSchema,
    window: SubgroupWindow,
    learner: C,
    proxy: Option<OnlineLogistic>,
    rng: ChaCha8Rng,
    cap_hits: u64,
    #[serde(skip)]
    synthetic_log: Option<Vec<Instance>>,
}

impl<C: Classifier> Rebalancer<C> {
    pub fn new(config: RebalancerConfig, schema: &StreamSchema, learner: C, seed: u64) -> Result<Self> {
        config.validate()?;
        let detector = Adwin::new(config.adwin_delta)?;
        let window = SubgroupWindow::new(schema, config.mode.grouping(), detector, config.mode == Mode::Cfsmote);
        let proxy =
            (config.situation_testing && config.judge == Judge::Proxy).then(|| OnlineLogistic::new(schema, 0.05));
        Ok(Rebalancer {
            config,
            schema: schema.clone(),
            window,
            learner,
            proxy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cap_hits: 0,
            synthetic_log: None,
        })
    }

    pub fn config(&self) -> &RebalancerConfig {
        &self.config
    }

    pub fn window(&self) -> &SubgroupWindow {
        &self.window
    }

    pub fn learner(&self) -> &C {
        &self.learner
    }

    pub fn learner_mut(&mut self) -> &mut C {
        &mut self.learner
    }

    pub fn into_learner(self) -> C {
        self.learner
    }

    /// Times the per-step synthetic cap stopped generation.
    pub fn cap_hits(&self) -> u64 {
        self.cap_hits
    }

    /// Starts recording every generated synthetic sample.
    pub fn record_synthetics(&mut self) {
        self.synthetic_log = Some(Vec::new());
    }

    pub fn synthetic_log(&self) -> &[Instance] {
        self.synthetic_log.as_deref().unwrap_or_default()
    }

    /// Situation test under the configured judge; always keeps when disabled.
    pub fn situation_test(&self, x: &Instance) -> bool {
        if !self.config.situation_testing {
            return true;
        }
        match &self.proxy {
            Some(proxy) => situation_test(x, proxy, &self.schema),
            None => situation_test(x, &self.learner, &self.schema),
        }
    }

    fn offer(&mut self, x: &Instance, outcome: &mut StepOutcome) {
        if self.situation_test(x) {
            let before = self.learner.resets();
            self.learner.learn_one(x);
            outcome.learner_resets += (self.learner.resets() - before) as usize;
            outcome.trained += 1;
        } else {
            outcome.discarded += 1;
        }
    }

    /// One full step for a natural sample: update the window, train on the
    /// sample if it passes situation testing, then oversample until every
    /// group meets the threshold. Synthetic counts grow whether or not a
    /// synthetic passes the test.
    pub fn process(&mut self, x: &Instance) -> Result<StepOutcome> {
        let mut outcome = StepOutcome {
            shrunk: self.window.observe(x)?,
            ..StepOutcome::default()
        };
        if let Some(proxy) = &mut self.proxy {
            proxy.learn_one(x);
        }
        self.offer(x, &mut outcome);

        let threshold = self.config.group_fraction_threshold();
        let min_size = self.config.min_group_size();
        let mut generated = 0;
        while self.window.all_groups_at_least(min_size) {
            let Some(group) = self.window.most_deficient(threshold) else {
                break;
            };
            if generated == self.config.max_synthetic_per_step {
                self.cap_hits += 1;
                tracing::warn!(
                    cap = self.config.max_synthetic_per_step,
                    "synthetic cap reached before the window was balanced"
                );
                break;
            }
            let synthetic = self
                .window
                .generate_synthetic(group, self.config.k_neighbors, min_size, &mut self.rng)?;
            generated += 1;
            if let Some(log) = &mut self.synthetic_log {
                log.push(synthetic.clone());
            }
            self.offer(&synthetic, &mut outcome);
        }
        outcome.synthetic = generated;
        Ok(outcome)
    }
}

impl<C: Classifier> Pipeline for Rebalancer<C> {
    fn predict_one(&self, x: &Instance) -> Bit {
        self.learner.predict_one(x)
    }

    fn learn_one(&mut self, x: &Instance) -> StepOutcome {
        self.process(x).expect("natural stream samples are always accepted")
    }
}
