//! Experiment orchestration: data ingestion, the silhouette sweep, the
//! sample-complexity study, the noisy-versus-ideal comparison and result files.

mod config;
mod data;
mod experiments;
mod record;

pub use config::{FeatureFamily, SampleSize, SweepConfig};
pub use data::{ingest_csv, make_blobs, read_dataset, Dataset};
pub use experiments::{draw_subset, run_noise_comparison, run_sample_complexity, run_sc_sweep};
pub use record::{
    emit_diagnostics, emit_results, pivots, read_records_csv, write_assignment_csv, write_records_csv,
    AssignmentFile, Experiment, ExperimentRecord, Failure, Outcome, Pivot, Timing,
};
