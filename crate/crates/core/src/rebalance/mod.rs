//! Continuous SMOTE pre-processing for imbalanced, fairness-sensitive streams.
//!
//! [`Rebalancer`] keeps a drift-managed window of recent natural samples split
//! into sub-groups, oversamples under-represented sub-groups with SMOTE, and
//! optionally filters every training sample through situation testing.
//!
//! * **CFSMOTE** splits the window into four (label × sensitive) sub-groups,
//!   monitors both the label and the sensitive-value distributions with ADWIN,
//!   and situation-tests every natural and synthetic sample.
//! * **C-SMOTE** splits by label only, monitors the label distribution, and
//!   trains on everything.

mod pipeline;
pub mod smote;
mod window;

use serde::{Deserialize, Serialize};

use crate::adwin::DEFAULT_DELTA;
use crate::error::{Error, Result};
use crate::stream::{Bit, Instance};

pub use pipeline::{situation_test, Judge, Rebalancer};
pub use window::{required_synthetics, GroupView, SubgroupWindow};

/// One of the four (label, sensitive) cells.
///
/// Keys are ordered unprivileged-negative, unprivileged-positive,
/// privileged-negative, privileged-positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubgroupKey {
    pub label: Bit,
    pub sensitive: Bit,
}

impl SubgroupKey {
    pub const ALL: [SubgroupKey; 4] = [
        SubgroupKey { label: 0, sensitive: 0 },
        SubgroupKey { label: 1, sensitive: 0 },
        SubgroupKey { label: 0, sensitive: 1 },
        SubgroupKey { label: 1, sensitive: 1 },
    ];

    pub fn of(x: &Instance) -> Self {
        SubgroupKey {
            label: x.label,
            sensitive: x.sensitive,
        }
    }

    pub fn index(self) -> usize {
        usize::from(self.sensitive) * 2 + usize::from(self.label)
    }

    pub fn from_index(index: usize) -> Self {
        SubgroupKey::ALL[index]
    }
}

/// How the window is partitioned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// Four (label × sensitive) sub-groups, indexed by [`SubgroupKey::index`].
    LabelAndSensitive,
    /// Two label groups, indexed by the label.
    LabelOnly,
}

impl Grouping {
    pub fn n_groups(self) -> usize {
        match self {
            Grouping::LabelAndSensitive => 4,
            Grouping::LabelOnly => 2,
        }
    }

    pub fn group_of(self, x: &Instance) -> usize {
        match self {
            Grouping::LabelAndSensitive => SubgroupKey::of(x).index(),
            Grouping::LabelOnly => usize::from(x.label),
        }
    }

    /// Label bit and, for four-way grouping, sensitive bit of a group.
    pub fn bits(self, group: usize) -> (Bit, Option<Bit>) {
        match self {
            Grouping::LabelAndSensitive => {
                let k = SubgroupKey::from_index(group);
                (k.label, Some(k.sensitive))
            }
            Grouping::LabelOnly => (group as Bit, None),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cfsmote,
    Csmote,
}

impl Mode {
    pub fn grouping(self) -> Grouping {
        match self {
            Mode::Cfsmote => Grouping::LabelAndSensitive,
            Mode::Csmote => Grouping::LabelOnly,
        }
    }
}

/// C-SMOTE states its trigger as `minority / majority ≥ r`. With two groups
/// that is the same as `minority / total ≥ r / (1 + r)`.
pub fn minority_fraction_for_ratio(ratio: f64) -> f64 {
    ratio / (1.0 + ratio)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RebalancerConfig {
    pub mode: Mode,
    pub k_neighbors: usize,
    pub min_window_size: usize,
    /// CFSMOTE: minimum share of each sub-group in the window.
    /// C-SMOTE: minimum minority/majority ratio.
    pub min_imbalance_ratio: f64,
    pub situation_testing: bool,
    pub judge: Judge,
    pub max_synthetic_per_step: usize,
    pub adwin_delta: f64,
}

impl RebalancerConfig {
    pub fn cfsmote() -> Self {
        RebalancerConfig {
            mode: Mode::Cfsmote,
            k_neighbors: 3,
            min_window_size: 10,
            min_imbalance_ratio: 0.245,
            situation_testing: true,
            judge: Judge::Learner,
            max_synthetic_per_step: 1000,
            adwin_delta: DEFAULT_DELTA,
        }
    }

    pub fn csmote() -> Self {
        RebalancerConfig {
            mode: Mode::Csmote,
            min_imbalance_ratio: 0.5,
            situation_testing: false,
            ..RebalancerConfig::cfsmote()
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Cfsmote => RebalancerConfig::cfsmote(),
            Mode::Csmote => RebalancerConfig::csmote(),
        }
    }

    /// Threshold on a group's share of the window total.
    pub fn group_fraction_threshold(&self) -> f64 {
        match self.mode {
            Mode::Cfsmote => self.min_imbalance_ratio,
            Mode::Csmote => minority_fraction_for_ratio(self.min_imbalance_ratio),
        }
    }

    /// Natural samples a group needs before it can seed synthetics.
    pub fn min_group_size(&self) -> usize {
        self.min_window_size.max(self.k_neighbors + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::param("k_neighbors", "must be at least 1"));
        }
        let t = self.group_fraction_threshold();
        let max = 1.0 / self.mode.grouping().n_groups() as f64;
        if !(t > 0.0 && t <= max + 1e-12) {
            return Err(Error::param(
                "min_imbalance_ratio",
                format!("{} gives group share {t}, outside (0, {max}]", self.min_imbalance_ratio),
            ));
        }
        if !(self.adwin_delta > 0.0 && self.adwin_delta < 1.0) {
            return Err(Error::param("adwin_delta", "must lie in (0, 1)"));
        }
        Ok(())
    }
}
