//! Hoeffding tree (VFDT) for binary classification.
//!
//! Leaves keep class counts plus per-attribute sufficient statistics:
//! class-conditional category counts for categorical attributes and
//! class-conditional Gaussian summaries for numeric ones. Categorical splits
//! are multiway, numeric splits are binary on one of `n_thresholds` evenly
//! spaced cut points between the observed minimum and maximum. Split merit is
//! information gain, so the Hoeffding bound range is `log2(2) = 1`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::learners::Classifier;
use crate::stream::{AttributeKind, Bit, Instance, StreamSchema};

/// `sqrt(range² · ln(1/δ) / (2n))`.
pub fn hoeffding_bound(range: f64, delta: f64, n: u64) -> Result<f64> {
    if range.is_nan() || range <= 0.0 {
        return Err(Error::param("range", format!("{range} must be positive")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", format!("{delta} not in (0, 1]")));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    Ok((range * range * (1.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafPrediction {
    MajorityClass,
    /// Naive Bayes once the leaf has seen `grace_period` samples, majority class before.
    NaiveBayes,
    /// Whichever of naive Bayes and majority class has been more accurate at the leaf.
    NaiveBayesAdaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTreeParams {
    pub grace_period: u32,
    pub split_confidence: f64,
    pub tie_threshold: f64,
    pub leaf_prediction: LeafPrediction,
    pub n_thresholds: usize,
    /// Candidate splits sending less than this fraction of the weight to all
    /// but one branch are ignored.
    pub min_branch_fraction: f64,
    pub max_depth: Option<usize>,
}

impl Default for HoeffdingTreeParams {
    fn default() -> Self {
        HoeffdingTreeParams {
            grace_period: 200,
            split_confidence: 1e-7,
            tie_threshold: 0.05,
            leaf_prediction: LeafPrediction::NaiveBayes,
            n_thresholds: 10,
            min_branch_fraction: 0.01,
            max_depth: None,
        }
    }
}

impl HoeffdingTreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.grace_period == 0 {
            return Err(Error::param("grace_period", "must be positive"));
        }
        if !(self.split_confidence > 0.0 && self.split_confidence < 1.0) {
            return Err(Error::param("split_confidence", "must lie in (0, 1)"));
        }
        if self.tie_threshold.is_nan() || self.tie_threshold < 0.0 {
            return Err(Error::param("tie_threshold", "must be non-negative"));
        }
        if self.n_thresholds == 0 {
            return Err(Error::param("n_thresholds", "must be positive"));
        }
        Ok(())
    }
}

/// Weighted running mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
struct Gaussian {
    weight: f64,
    mean: f64,
    m2: f64,
}

impl Gaussian {
    fn update(&mut self, x: f64, w: f64) {
        let total = self.weight + w;
        let delta = x - self.mean;
        self.mean += w * delta / total;
        self.m2 += w * delta * (x - self.mean);
        self.weight = total;
    }

    fn std_dev(&self) -> f64 {
        if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0).sqrt()
        } else {
            0.0
        }
    }

    /// Estimated weight at or below `t`.
    fn weight_below(&self, t: f64) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        let sd = self.std_dev();
        if sd > 0.0 {
            let z = (t - self.mean) / (sd * std::f64::consts::SQRT_2);
            self.weight * 0.5 * (1.0 + erf(z))
        } else if t >= self.mean {
            self.weight
        } else {
            0.0
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let sd = self.std_dev();
        if sd > 0.0 {
            let z = (x - self.mean) / sd;
            (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
        } else if (x - self.mean).abs() < 1e-12 {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Observer {
    Numeric {
        per_class: [Gaussian; 2],
        min: f64,
        max: f64,
    },
    Categorical {
        /// `counts[category][class]`.
        counts: Vec<[f64; 2]>,
    },
}

impl Observer {
    fn new(kind: AttributeKind) -> Self {
        match kind {
            AttributeKind::Numeric => Observer::Numeric {
                per_class: [Gaussian::default(); 2],
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            AttributeKind::Categorical { arity } => Observer::Categorical {
                counts: vec![[0.0; 2]; arity],
            },
        }
    }

    fn update(&mut self, value: f64, class: usize, w: f64) {
        match self {
            Observer::Numeric { per_class, min, max } => {
                per_class[class].update(value, w);
                *min = min.min(value);
                *max = max.max(value);
            }
            Observer::Categorical { counts } => counts[value as usize][class] += w,
        }
    }

    /// Factor of `P(x_a = value | class)` used by naive Bayes.
    /// Numeric observers whose class-conditional estimates include a point
    /// mass have no comparable density and are left out of naive Bayes.
    fn has_density(&self) -> bool {
        match self {
            Observer::Numeric { per_class, .. } => per_class.iter().all(|g| g.std_dev() > 0.0),
            Observer::Categorical { .. } => true,
        }
    }

    fn likelihood(&self, value: f64, class: usize) -> f64 {
        match self {
            Observer::Numeric { per_class, .. } => per_class[class].pdf(value),
            Observer::Categorical { counts } => {
                let class_total: f64 = counts.iter().map(|c| c[class]).sum();
                (counts[value as usize][class] + 1.0) / (class_total + counts.len() as f64)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SplitTest {
    /// `x <= threshold` goes to child 0, otherwise child 1.
    Threshold(f64),
    /// Child index is the category index.
    Categorical,
}

/// Outcome of a split attempt that decided to split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitDecision {
    pub attribute: usize,
    pub test: SplitTest,
    pub merit: f64,
    pub second_merit: f64,
    pub bound: f64,
    /// Estimated class distribution per child.
    pub child_distributions: Vec<[f64; 2]>,
}

fn entropy(dist: &[f64; 2]) -> f64 {
    let total = dist[0] + dist[1];
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

fn info_gain(parent: &[f64; 2], children: &[[f64; 2]], min_branch_fraction: f64) -> f64 {
    let total = parent[0] + parent[1];
    let child_weights: Vec<f64> = children.iter().map(|c| c[0] + c[1]).collect();
    let big_enough = child_weights
        .iter()
        .filter(|&&w| w / total >= min_branch_fraction)
        .count();
    if big_enough < 2 {
        return f64::NEG_INFINITY;
    }
    let weighted: f64 = children
        .iter()
        .zip(&child_weights)
        .map(|(c, w)| w / total * entropy(c))
        .sum();
    entropy(parent) - weighted
}

/// Statistics held by one leaf.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafStats {
    /// Weight per class routed here since the leaf was created.
    class_counts: [f64; 2],
    /// Class distribution estimated by the parent split; used while the leaf is empty.
    prior: [f64; 2],
    observers: Vec<Observer>,
    /// Attributes that may no longer be split on along this path.
    excluded: Vec<bool>,
    weight_at_last_attempt: f64,
    depth: usize,
    mc_correct: f64,
    nb_correct: f64,
}

impl LeafStats {
    pub fn new(kinds: &[AttributeKind]) -> Self {
        LeafStats::child(kinds, [0.0; 2], vec![false; kinds.len()], 0)
    }

    fn child(kinds: &[AttributeKind], prior: [f64; 2], excluded: Vec<bool>, depth: usize) -> Self {
        LeafStats {
            class_counts: [0.0; 2],
            prior,
            observers: kinds.iter().map(|k| Observer::new(*k)).collect(),
            excluded,
            weight_at_last_attempt: 0.0,
            depth,
            mc_correct: 0.0,
            nb_correct: 0.0,
        }
    }

    pub fn class_counts(&self) -> [f64; 2] {
        self.class_counts
    }

    pub fn weight(&self) -> f64 {
        self.class_counts[0] + self.class_counts[1]
    }

    pub fn learn(&mut self, x: &Instance, w: f64) {
        let class = usize::from(x.label);
        self.class_counts[class] += w;
        for (obs, &value) in self.observers.iter_mut().zip(&x.features) {
            obs.update(value, class, w);
        }
    }

    fn majority_proba(&self) -> f64 {
        let w = self.weight();
        if w > 0.0 {
            self.class_counts[1] / w
        } else {
            let p = self.prior[0] + self.prior[1];
            if p > 0.0 {
                self.prior[1] / p
            } else {
                0.0
            }
        }
    }

    fn naive_bayes_proba(&self, x: &Instance) -> f64 {
        const FLOOR: f64 = 1e-10;
        let w = self.weight();
        if w == 0.0 {
            return self.majority_proba();
        }
        let mut log_post = [f64::NEG_INFINITY; 2];
        for (class, lp) in log_post.iter_mut().enumerate() {
            if self.class_counts[class] == 0.0 {
                continue;
            }
            *lp = (self.class_counts[class] / w).ln()
                + self
                    .observers
                    .iter()
                    .zip(&x.features)
                    .filter(|(obs, _)| obs.has_density())
                    .map(|(obs, &v)| obs.likelihood(v, class).max(FLOOR).ln())
                    .sum::<f64>();
        }
        match (log_post[0].is_finite(), log_post[1].is_finite()) {
            (true, true) => 1.0 / (1.0 + (log_post[0] - log_post[1]).exp()),
            (false, true) => 1.0,
            _ => 0.0,
        }
    }

    fn proba(&self, x: &Instance, params: &HoeffdingTreeParams) -> f64 {
        match params.leaf_prediction {
            LeafPrediction::MajorityClass => self.majority_proba(),
            LeafPrediction::NaiveBayes => {
                if self.weight() >= f64::from(params.grace_period) {
                    self.naive_bayes_proba(x)
                } else {
                    self.majority_proba()
                }
            }
            LeafPrediction::NaiveBayesAdaptive => {
                if self.nb_correct > self.mc_correct {
                    self.naive_bayes_proba(x)
                } else {
                    self.majority_proba()
                }
            }
        }
    }

    fn candidates(
        &self,
        kinds: &[AttributeKind],
        params: &HoeffdingTreeParams,
    ) -> Vec<(usize, SplitTest, f64, Vec<[f64; 2]>)> {
        let mut out = Vec::new();
        for (attribute, obs) in self.observers.iter().enumerate() {
            if self.excluded[attribute] {
                continue;
            }
            match obs {
                Observer::Categorical { counts } => {
                    let merit = info_gain(&self.class_counts, counts, params.min_branch_fraction);
                    if merit.is_finite() {
                        out.push((attribute, SplitTest::Categorical, merit, counts.clone()));
                    }
                }
                Observer::Numeric { per_class, min, max } => {
                    if max <= min {
                        continue;
                    }
                    let mut best: Option<(f64, f64, Vec<[f64; 2]>)> = None;
                    let n = params.n_thresholds;
                    for i in 0..n {
                        let t = min + (max - min) * (i + 1) as f64 / (n + 1) as f64;
                        let left = [per_class[0].weight_below(t), per_class[1].weight_below(t)];
                        let right = [per_class[0].weight - left[0], per_class[1].weight - left[1]];
                        let children = vec![left, right];
                        let merit = info_gain(&self.class_counts, &children, params.min_branch_fraction);
                        if merit.is_finite() && best.as_ref().is_none_or(|b| merit > b.0) {
                            best = Some((merit, t, children));
                        }
                    }
                    debug_assert!(kinds[attribute] == AttributeKind::Numeric);
                    if let Some((merit, t, children)) = best {
                        out.push((attribute, SplitTest::Threshold(t), merit, children));
                    }
                }
            }
        }
        out
    }

    /// Decides whether this leaf should split now.
    ///
    /// The best and second-best candidates (the "no split" option counts as a
    /// candidate with merit 0) are compared against the Hoeffding bound; a
    /// split happens when their gap exceeds the bound or the bound has fallen
    /// under the tie threshold. Equal merits resolve to the lowest attribute
    /// index.
    pub fn attempt_split(&self, kinds: &[AttributeKind], params: &HoeffdingTreeParams) -> Option<SplitDecision> {
        let w = self.weight();
        if self.class_counts[0] == 0.0 || self.class_counts[1] == 0.0 {
            return None;
        }
        if params.max_depth.is_some_and(|d| self.depth >= d) {
            return None;
        }
        let mut candidates = self.candidates(kinds, params);
        // Stable sort keeps attribute order among equal merits.
        candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
        let (attribute, test, merit, child_distributions) = candidates.first()?.clone();
        let second_merit = candidates.get(1).map_or(0.0, |c| c.2).max(0.0);
        if merit <= 0.0 {
            return None;
        }
        let bound = hoeffding_bound(1.0, params.split_confidence, w.ceil().max(1.0) as u64)
            .expect("parameters validated at construction");
        (merit - second_merit > bound || bound < params.tie_threshold).then_some(SplitDecision {
            attribute,
            test,
            merit,
            second_merit,
            bound,
            child_distributions,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(LeafStats),
    Split {
        attribute: usize,
        test: SplitTest,
        children: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTree {
    params: HoeffdingTreeParams,
    kinds: Vec<AttributeKind>,
    nodes: Vec<Node>,
    weight_seen: f64,
}

impl HoeffdingTree {
    pub fn new(schema: &StreamSchema, params: HoeffdingTreeParams) -> Result<Self> {
        params.validate()?;
        let kinds: Vec<AttributeKind> = schema.attributes().iter().map(|a| a.kind).collect();
        Ok(HoeffdingTree {
            nodes: vec![Node::Leaf(LeafStats::new(&kinds))],
            params,
            kinds,
            weight_seen: 0.0,
        })
    }

    pub fn params(&self) -> &HoeffdingTreeParams {
        &self.params
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(l.depth),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Attributes tested along the path from the root to the leaf reached by `x`.
    pub fn path_attributes(&self, x: &Instance) -> Vec<usize> {
        let mut path = Vec::new();
        let mut idx = 0;
        while let Node::Split { attribute, .. } = &self.nodes[idx] {
            path.push(*attribute);
            idx = self.child_for(idx, x);
        }
        path
    }

    pub fn leaf_for(&self, x: &Instance) -> &LeafStats {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf(l) => l,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    /// Root split attribute, if the tree has split.
    pub fn root_attribute(&self) -> Option<usize> {
        match &self.nodes[0] {
            Node::Split { attribute, .. } => Some(*attribute),
            Node::Leaf(_) => None,
        }
    }

    fn child_for(&self, idx: usize, x: &Instance) -> usize {
        match &self.nodes[idx] {
            Node::Split {
                attribute,
                test,
                children,
            } => {
                let v = x.features[*attribute];
                match test {
                    SplitTest::Threshold(t) => children[usize::from(v > *t)],
                    SplitTest::Categorical => children[(v as usize).min(children.len() - 1)],
                }
            }
            Node::Leaf(_) => idx,
        }
    }

    fn leaf_index(&self, x: &Instance) -> usize {
        let mut idx = 0;
        while matches!(self.nodes[idx], Node::Split { .. }) {
            idx = self.child_for(idx, x);
        }
        idx
    }

    fn split(&mut self, idx: usize, decision: SplitDecision) {
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            unreachable!("only leaves split")
        };
        let mut excluded = leaf.excluded.clone();
        if decision.test == SplitTest::Categorical {
            excluded[decision.attribute] = true;
        }
        let depth = leaf.depth + 1;
        let first = self.nodes.len();
        for dist in &decision.child_distributions {
            self.nodes.push(Node::Leaf(LeafStats::child(
                &self.kinds,
                *dist,
                excluded.clone(),
                depth,
            )));
        }
        self.nodes[idx] = Node::Split {
            attribute: decision.attribute,
            test: decision.test,
            children: (first..self.nodes.len()).collect(),
        };
    }
}

impl Classifier for HoeffdingTree {
    fn learn_weighted(&mut self, x: &Instance, weight: u32) {
        if weight == 0 {
            return;
        }
        let w = f64::from(weight);
        self.weight_seen += w;
        let idx = self.leaf_index(x);
        let params = self.params;
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!()
        };
        if params.leaf_prediction == LeafPrediction::NaiveBayesAdaptive {
            let y = f64::from(x.label);
            if (leaf.majority_proba() > 0.5) as u8 as f64 == y {
                leaf.mc_correct += w;
            }
            if (leaf.naive_bayes_proba(x) > 0.5) as u8 as f64 == y {
                leaf.nb_correct += w;
            }
        }
        leaf.learn(x, w);
        if leaf.weight() - leaf.weight_at_last_attempt >= f64::from(params.grace_period) {
            leaf.weight_at_last_attempt = leaf.weight();
            if let Some(decision) = leaf.attempt_split(&self.kinds, &params) {
                self.split(idx, decision);
            }
        }
    }

    fn predict_proba(&self, x: &Instance) -> f64 {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf(l) => l.proba(x, &self.params),
            Node::Split { .. } => unreachable!(),
        }
    }

    fn predict_one(&self, x: &Instance) -> Bit {
        Bit::from(self.predict_proba(x) > 0.5)
    }

    fn has_learned(&self) -> bool {
        self.weight_seen > 0.0
    }
}
