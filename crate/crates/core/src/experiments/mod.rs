//! Two-device experiment campaigns and their on-disk artifacts.

mod artifacts;
mod config;
mod run;

pub use artifacts::{
    emit_artifacts, read_raw_comparisons, Manifest, ManifestEntry, CONFIG_JSON, INTER_CSV, INTRA_CSV, MANIFEST_JSON,
    RANDOM_CSV, SUMMARY_JSON,
};
pub use config::{ExperimentConfig, CONFIG_FORMAT_VERSION};
pub use run::{
    build_devices, run_large_pair, run_pair, run_small_pair, summarize, CollisionSummary, ExperimentReport,
    ExperimentSummary, InterRow, PairRow, RawComparisons, UniquenessPoint,
};
