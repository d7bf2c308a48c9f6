//! Configuration, seeded experiment drivers and result serialization.

mod config;
mod experiments;
mod output;

pub use config::{load_config, SystemConfig, DEFAULT_CDF_TRIALS, DEFAULT_SE_TRIALS};
pub use experiments::{
    allocation_feasible, epsilon_grid, latency_grid, run_cdf_experiment, run_lqr_sweeps, run_se_tightness, Method,
    EPSILON_RANGE, SE_ANTENNAS, SWEEP_INSTABILITIES, SWEEP_POINTS, SWEEP_POWER,
};
pub use output::{
    empirical_cdf, read_csv_records, summarize, write_csv, write_json, write_results, CdfPoint, ExperimentResult,
    GroupSummary, OutputFormat, Record, RecordDetail, CSV_COLUMNS,
};
