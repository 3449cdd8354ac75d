//! Experiment harness: configuration, sample files, the ranking-validation
//! and granularity experiments, and plot-data export.

pub mod config;
pub mod export;
pub mod granularity;
pub mod kendall;
pub mod ranking;
pub mod samples;

pub use config::{ExperimentConfig, RandomBaseline};
pub use export::{empirical_pmf_csv, export_empirical_pmf, generate_dataset};
pub use granularity::{run_granularity_eval, GranularityReport, ModelSource, ModelSummary};
pub use kendall::{kendall_tau, tau_b};
pub use ranking::{run_ranking_validation, BinningMethod, RankingReport, TauSummary};
pub use samples::{read_sample_set, read_samples, write_samples};
