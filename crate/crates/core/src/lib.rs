//! Fairness-aware continuous SMOTE for data streams.
//!
//! The crate bundles everything needed to run prequential (test-then-train)
//! experiments on imbalanced, fairness-sensitive streams:
//!
//! * [`stream`]: instances, schemas, performance metrics and the evaluation loop.
//! * [`adwin`]: the ADWIN adaptive-window change detector.
//! * [`learners`]: Hoeffding trees, drift-reset wrappers and online bagging.
//! * [`rebalance`]: CFSMOTE and C-SMOTE pre-processing.
//! * [`fairness`]: group and individual fairness metrics.

pub mod adwin;
pub mod datasets;
pub mod error;
pub mod experiment;
pub mod fairness;
pub mod learners;
pub mod rebalance;
pub mod stream;

pub use adwin::Adwin;
pub use datasets::{load_dataset, permute_stream, DatasetManifest, LoadedDataset};
pub use error::{Error, Result};
pub use experiment::{run_experiment, Aggregate, ExperimentConfig};
pub use fairness::{FlipLedger, GroupConfusionLedger};
pub use learners::{AdaptiveReset, Classifier, HoeffdingTree, HoeffdingTreeParams, OnlineBagging};
pub use rebalance::{Judge, Mode, Rebalancer, RebalancerConfig, SubgroupKey};
pub use stream::{
    run_test_then_train, Attribute, AttributeKind, Bit, Instance, Metric, MetricSet, Pipeline, RunReport, StreamSchema,
};
