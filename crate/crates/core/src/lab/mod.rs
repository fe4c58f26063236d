//! Experiment plumbing behind the command-line tool: artifact files, the
//! training loop with spectral monitoring, stability sweeps and verification suites.

mod config;
mod files;
mod gendata;
mod snapshot;
mod sweep;
mod train;
pub mod verify;

pub use config::{read_operator, Experiment, ExperimentConfig};
pub use files::{read_json, write_json, CriticFile, CriticSpec};
pub use gendata::{write_baird, write_generated, CRITIC_FILE, DATASET_FILE, FEATURES_FILE, MDP_FILE, SCORES_FILE};
pub use snapshot::{snapshot_at, SnapshotSettings};
pub use sweep::{parse_grid, sweep, sweep_to_writer, write_sweep, SweepGrid, SweepRow, SweepSource, CROSSING_BAND, SWEEP_COLUMNS};
pub use train::{
    read_trace, trace_to_writer, train, write_trace, OptimizerKind, RunStatus, TraceRow, TrainConfig, TrainOutcome,
    DIVERGENCE_CAP, TRACE_COLUMNS, TRACE_HEADER,
};

/// Environment variable capping the worker pool of sweeps and verification suites.
pub const THREADS_ENV: &str = "COLLAPSE_LAB_THREADS";

/// Sizes the global worker pool from [`THREADS_ENV`]. Later calls are no-ops.
pub fn configure_threads() -> crate::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| crate::LabError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool that is already built keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
