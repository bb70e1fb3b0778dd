//! Monte Carlo sweeps, statistical reports and the command line front end.

pub mod cli;
mod config;
mod reports;
pub mod stats;
mod sweep;

pub use config::{ExperimentConfig, SamplingModel};
pub use reports::{
    deviation_report, one_node_difference_check, poissonization_comparison, variance_scaling_report, CountAtMean,
    DeviationRow, OneNodeReport, PoissonComparison, SampleMoments, ScalingPoint, VarianceScalingReport,
};
pub use sweep::{
    read_trials_csv, run_sweep, run_sweep_to_dir, run_sweep_with, setup_for, summarize_n, trial_seed,
    write_trials_csv, NSetup, NSummary, SweepResult, SweepSummary, TrialRecord,
};
