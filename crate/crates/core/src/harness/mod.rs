//! Experiment configuration, the Monte Carlo runner and result emission.

mod config;
mod experiment;
mod output;

pub use config::{CodebookConfig, ExperimentConfig};
pub use experiment::{child_seed, run_experiment, summarize, ExperimentOutput, RealizationRecord, SummaryRow};
pub use output::{emit_csv, emit_summary_json, sig9, summary_json, CSV_HEADER};
