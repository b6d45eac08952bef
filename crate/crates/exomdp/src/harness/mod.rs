//! Experiment orchestration: configuration, per-algorithm episode loops,
//! CSV/metadata output, and SVG regret plots.

mod config;
mod csv;
mod plot;
mod runner;

pub use config::{
    Algorithm, BanditParams, ExperimentConfig, ExperimentKind, PegParams, StorageParams,
    TabularParams,
};
pub use csv::{read_csv, write_csv};
pub use plot::render_plots;
pub use runner::{
    run_bandit_experiment, run_experiment, run_peg_experiment, run_peg_experiment_with_summary,
    run_storage_experiment, run_tabular_experiment, PegSummary,
};

/// One per-episode metric row.
///
/// `cumulative_regret` is the running prefix sum of `instant_regret` within
/// its `(algorithm, seed)` series. `wall_time_ms` is zero unless timing
/// capture is enabled, keeping default output byte-reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Episode index, 1-based.
    pub episode: usize,
    pub instant_regret: f64,
    pub cumulative_regret: f64,
    pub model_error: f64,
    pub wall_time_ms: f64,
}
