//! Seeded Monte Carlo studies of coverage probability, witness counts and
//! coverage thresholds, with CSV and JSON reports.

mod config;
mod report;
mod run;
mod stats;

pub use config::{ExperimentConfig, RegionSpec, Study, MAX_REPLICATIONS};
pub use report::{csv_body, parse_csv, parse_json, samples_to_text, to_csv, to_json, write_atomic, CSV_COLUMNS};
pub use run::{
    estimate_coverage_probability, mean_witness_study, rate_study, replicate, run_experiment, stream_index,
    threshold_statistic_sample, ExperimentReport, Replication, ReportRow, ThresholdSamples, MAX_ATTEMPTS,
    RESAMPLE_BUDGET,
};
pub use stats::{fit_rate, gumbel_cdf, ks_gumbel, mean_se, RateFit, RatePoint, NOISE_FLOOR_SIGMAS};
