//! Heatmaps and aggregate statistics.

mod heatmap;
mod summary;

use thiserror::Error;

pub use heatmap::{render_heatmap, score_color};
pub use summary::{summarize, summary_csv, MatrixGroup, ScoreKind, SummaryStats, SAME_RECORDING};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("group {0:?} has no score matrices")]
    EmptyGroup(String),
}
