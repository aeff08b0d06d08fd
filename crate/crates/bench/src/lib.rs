//! Seeded benchmark protocol: instance generation, timing, verification by
//! replay, summary statistics and report files.

pub mod harness;
pub mod instances;
pub mod report;
pub mod scaling;
pub mod stats;

use thiserror::Error;

pub use harness::{run_benchmark, BenchConfig, BenchmarkRecord, FailureReason};
pub use instances::{generate_instances, Instance};
pub use report::{emit_report, render_table, write_records_csv, ReportFiles, RECORDS_HEADER};
pub use scaling::{scaling_sweep, ScalingConfig, ScalingRow};
pub use stats::{spearman, summarize, Distribution, PlannerSummary, SummaryStats};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no planners given")]
    NoPlanners,
    #[error("no benchmark records")]
    NoRecords,
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] rowplan_core::EnvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
