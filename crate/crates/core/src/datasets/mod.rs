//! Benchmark dataset loading, stream permutation and synthetic drift streams.

mod drift;
mod loader;
mod manifest;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::stream::Instance;

pub use drift::{generate_biased_drift_stream, DriftStreamParams};
pub use loader::{load_dataset, LoadReport, LoadedDataset, MAX_MALFORMED_FRACTION};
pub use manifest::{ColumnKind, ColumnSpec, DatasetManifest, LabelSpec, SensitiveSpec};

/// Seeded Fisher–Yates permutation of a dataset into one stream.
pub fn permute_stream(instances: &[Instance], seed: u64) -> Vec<Instance> {
    let mut out = instances.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}
