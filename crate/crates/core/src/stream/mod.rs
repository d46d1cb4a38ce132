//! Stream samples, schemas and prequential evaluation.

pub mod instance;
pub mod metrics;
pub mod prequential;

pub use instance::{Attribute, AttributeKind, Bit, Instance, StreamSchema, POSITIVE, PRIVILEGED};
pub use metrics::{Metric, PrequentialLedger};
pub use prequential::{
    run_test_then_train, BarePipeline, Evaluators, EventRow, MetricSet, Pipeline, RunReport, Snapshot, StepOutcome,
    StepTotals, DEFAULT_SNAPSHOT_EVERY,
};
