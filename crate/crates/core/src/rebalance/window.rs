use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adwin::Adwin;
use crate::error::{Error, Result};
use crate::rebalance::smote::{self, FeatureScales};
use crate::rebalance::Grouping;
use crate::stream::{AttributeKind, Instance, StreamSchema};

/// Smallest `m ≥ 0` with `(group + m) / (total + m) ≥ threshold`.
///
/// Lower bound per group only: with several deficient groups the generation
/// loop interleaves them.
pub fn required_synthetics(group: u64, total: u64, threshold: f64) -> u64 {
    assert!(threshold < 1.0, "threshold must be below 1");
    let deficit = threshold * total as f64 - group as f64;
    if deficit <= 0.0 {
        return 0;
    }
    let mut m = (deficit / (1.0 - threshold)).ceil().max(0.0) as u64;
    // guard against rounding on exact boundaries
    while m > 0 && (group + m - 1) as f64 >= threshold * (total + m - 1) as f64 {
        m -= 1;
    }
    while ((group + m) as f64) < threshold * (total + m) as f64 {
        m += 1;
    }
    m
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct Group {
    /// Natural samples with their arrival index, oldest first.
    samples: VecDeque<(u64, Instance)>,
    synthetic_count: u64,
}

/// Read-only view of one sub-group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupView {
    pub natural_count: usize,
    pub synthetic_count: u64,
    pub oldest_arrival: Option<u64>,
}

/// Sliding store of recent natural samples, partitioned into sub-groups and
/// cut back whenever a distribution monitor detects drift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupWindow {
    grouping: Grouping,
    kinds: Vec<AttributeKind>,
    sensitive_position: usize,
    groups: Vec<Group>,
    label_detector: Adwin,
    sensitive_detector: Option<Adwin>,
    scales: FeatureScales,
    next_arrival: u64,
    last_cut: Option<u64>,
}

impl SubgroupWindow {
    /// `monitor_sensitive` adds the sensitive-value ADWIN next to the label one.
    pub fn new(schema: &StreamSchema, grouping: Grouping, detector: Adwin, monitor_sensitive: bool) -> Self {
        let kinds: Vec<AttributeKind> = schema.attributes().iter().map(|a| a.kind).collect();
        SubgroupWindow {
            grouping,
            scales: FeatureScales::new(&kinds),
            kinds,
            sensitive_position: schema.sensitive_position(),
            groups: vec![Group::default(); grouping.n_groups()],
            sensitive_detector: monitor_sensitive.then(|| detector.clone()),
            label_detector: detector,
            next_arrival: 0,
            last_cut: None,
        }
    }

    pub fn grouping(&self) -> Grouping {
        self.grouping
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, g: usize) -> GroupView {
        let group = &self.groups[g];
        GroupView {
            natural_count: group.samples.len(),
            synthetic_count: group.synthetic_count,
            oldest_arrival: group.samples.front().map(|(a, _)| *a),
        }
    }

    pub fn natural_count(&self, g: usize) -> usize {
        self.groups[g].samples.len()
    }

    pub fn synthetic_count(&self, g: usize) -> u64 {
        self.groups[g].synthetic_count
    }

    pub fn natural_total(&self) -> usize {
        self.groups.iter().map(|g| g.samples.len()).sum()
    }

    /// Natural plus synthetic count of all groups.
    pub fn total(&self) -> u64 {
        self.groups
            .iter()
            .map(|g| g.samples.len() as u64 + g.synthetic_count)
            .sum()
    }

    /// Arrival index of the newest sample discarded by the latest drift cut.
    pub fn last_cut(&self) -> Option<u64> {
        self.last_cut
    }

    pub fn label_detector(&self) -> &Adwin {
        &self.label_detector
    }

    pub fn sensitive_detector(&self) -> Option<&Adwin> {
        self.sensitive_detector.as_ref()
    }

    /// All stored instances with their arrival indices.
    pub fn stored(&self) -> impl Iterator<Item = (u64, &Instance)> {
        self.groups.iter().flat_map(|g| g.samples.iter().map(|(a, x)| (*a, x)))
    }

    pub fn group_samples(&self, g: usize) -> impl Iterator<Item = &Instance> {
        self.groups[g].samples.iter().map(|(_, x)| x)
    }

    pub fn scales(&self) -> &FeatureScales {
        &self.scales
    }

    /// Forces synthetic counts, for sizing experiments and tests.
    pub fn set_synthetic_count(&mut self, g: usize, count: u64) {
        self.groups[g].synthetic_count = count;
    }

    /// Adds a natural instance and feeds the distribution monitors; returns
    /// whether a drift cut happened.
    pub fn observe(&mut self, x: &Instance) -> Result<bool> {
        if x.is_synthetic {
            return Err(Error::SyntheticObserved);
        }
        let arrival = self.next_arrival;
        self.next_arrival += 1;
        self.scales.add(&x.features);
        self.groups[self.grouping.group_of(x)]
            .samples
            .push_back((arrival, x.clone()));

        // The detectors see every natural sample, so after a cut the retained
        // detector width covers exactly the newest `width` arrivals.
        let mut cut: Option<u64> = None;
        let mut consider = |detector: &mut Adwin, value: f64| {
            if detector.add_element(value).expect("binary value") {
                let width = detector.width() as u64;
                if let Some(c) = (arrival + 1).checked_sub(width + 1) {
                    cut = Some(cut.map_or(c, |prev: u64| prev.max(c)));
                }
                true
            } else {
                false
            }
        };
        let mut drift = consider(&mut self.label_detector, f64::from(x.label));
        if let Some(d) = &mut self.sensitive_detector {
            drift |= consider(d, f64::from(x.sensitive));
        }
        if let Some(cut) = cut {
            self.purge_through(cut);
        }
        Ok(drift)
    }

    /// Drops every natural sample with arrival index `<= cut` and rescales the
    /// synthetic counts by each group's surviving fraction.
    pub fn purge_through(&mut self, cut: u64) {
        let mut removed_any = false;
        for group in &mut self.groups {
            let before = group.samples.len();
            while group.samples.front().is_some_and(|(a, _)| *a <= cut) {
                group.samples.pop_front();
            }
            let after = group.samples.len();
            if after < before {
                removed_any = true;
                let surviving = after as f64 / before as f64;
                group.synthetic_count = (group.synthetic_count as f64 * surviving).round() as u64;
            }
        }
        self.last_cut = Some(self.last_cut.map_or(cut, |c| c.max(cut)));
        if removed_any {
            self.scales
                .rebuild(self.groups.iter().flat_map(|g| g.samples.iter().map(|(_, x)| x)));
        }
    }

    /// Share of the window held by group `g`, counting natural and synthetic samples.
    pub fn imbalance_ratio(&self, g: usize) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| {
            let group = &self.groups[g];
            (group.samples.len() as u64 + group.synthetic_count) as f64 / total as f64
        })
    }

    pub fn required_synthetics(&self, g: usize, threshold: f64) -> u64 {
        let group = &self.groups[g];
        required_synthetics(
            group.samples.len() as u64 + group.synthetic_count,
            self.total(),
            threshold,
        )
    }

    /// Group with the lowest share below `threshold`; ties go to the lowest index.
    pub fn most_deficient(&self, threshold: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for g in 0..self.groups.len() {
            let r = self.imbalance_ratio(g)?;
            if r < threshold && best.is_none_or(|(_, b)| r < b) {
                best = Some((g, r));
            }
        }
        best.map(|(g, _)| g)
    }

    pub fn all_groups_at_least(&self, size: usize) -> bool {
        self.groups.iter().all(|g| g.samples.len() >= size)
    }

    /// Creates one SMOTE sample for group `g` and counts it; the sample itself
    /// is not stored.
    ///
    /// Random draws, in order: seed position, neighbour rank, then one draw
    /// per feature (interpolation gap for numerics, seed-or-neighbour coin for
    /// categoricals).
    pub fn generate_synthetic<R: Rng + ?Sized>(
        &mut self,
        g: usize,
        k_neighbors: usize,
        min_size: usize,
        rng: &mut R,
    ) -> Result<Instance> {
        let need = min_size.max(k_neighbors + 1);
        let have = self.groups[g].samples.len();
        if have < need {
            return Err(Error::GroupTooSmall { key: g, have, need });
        }
        let samples = &self.groups[g].samples;
        let seed = rng.random_range(0..have);
        let neighbors = smote::nearest_neighbors(
            samples.iter().map(|(_, x)| x.features.as_slice()),
            seed,
            &samples[seed].1.features,
            k_neighbors,
            &self.kinds,
            &self.scales,
        );
        let pick = neighbors[rng.random_range(0..neighbors.len())];
        let mut features = smote::interpolate(&samples[seed].1.features, &samples[pick].1.features, &self.kinds, rng);

        let (label, sensitive) = self.grouping.bits(g);
        let sensitive = match sensitive {
            Some(s) => {
                features[self.sensitive_position] = f64::from(s);
                s
            }
            None => features[self.sensitive_position] as u8,
        };
        self.groups[g].synthetic_count += 1;
        Ok(Instance {
            features,
            label,
            sensitive,
            is_synthetic: true,
        })
    }
}
