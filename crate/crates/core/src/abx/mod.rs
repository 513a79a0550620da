//! ABX discrimination between snippet sets.
//!
//! For a set `S` (sharing the characteristic) and a set `T` (not sharing it),
//! a triplet is `(a, x, b)` with `a != x` drawn from `S` and `b` from `T`.
//! It is won when `d(a, x) < d(a, b)` and tied when the distances are equal;
//! ties count half.

mod contrast;
mod directional;
mod distance;
mod matrix;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingError;
use crate::snippet::SnippetError;

pub use contrast::{group_contrast, GroupContrast, ValueMean, ValuePairMean};
pub use directional::{
    abx_diagonal, abx_directional, abx_directional_fast, abx_self_diagnostic, pair_seed,
};
pub use distance::cosine_distance;
pub use matrix::{score_matrix, score_matrix_from_sets, AbxScoreMatrix, MatrixParams};

#[derive(Debug, Error)]
pub enum AbxError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("{id:?} has {found} snippets, at least {needed} required")]
    TooFewSnippets {
        id: String,
        needed: usize,
        found: usize,
    },
    #[error("{0} recordings given, at least 2 required")]
    TooFewRecordings(usize),
    #[error("sampled mode needs a positive triplet count")]
    EmptySample,
    #[error("pair ({a:?}, {b:?}): {source}")]
    Pair {
        a: String,
        b: String,
        #[source]
        source: Box<AbxError>,
    },
    #[error("recording {id:?}: {source}")]
    Load {
        id: String,
        #[source]
        source: EmbeddingError,
    },
    #[error("recording {id:?}: {source}")]
    Snippet {
        id: String,
        #[source]
        source: SnippetError,
    },
    #[error("no recording carries metadata key {0:?}")]
    UnknownKey(String),
    #[error("metadata key {key:?} takes a single value {value:?}")]
    SingleValue { key: String, value: String },
    #[error("score matrix is inconsistent: {0}")]
    InconsistentMatrix(String),
}

/// How triplets are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum AbxMode {
    /// Every ordered triplet.
    #[default]
    Full,
    /// `count` triplets drawn uniformly with replacement, seeded.
    Sampled { seed: u64, count: u64 },
}

impl fmt::Display for AbxMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbxMode::Full => f.write_str("full"),
            AbxMode::Sampled { seed, count } => write!(f, "sampled(seed={seed}, count={count})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbxResult {
    pub score: f64,
    pub wins: u64,
    pub ties: u64,
    pub total_triplets: u64,
    pub mode: AbxMode,
}

impl AbxResult {
    pub fn from_counts(wins: u64, ties: u64, total_triplets: u64, mode: AbxMode) -> Self {
        debug_assert!(total_triplets > 0 && wins + ties <= total_triplets);
        let score = (wins as f64 + 0.5 * ties as f64) / total_triplets as f64;
        Self {
            score,
            wins,
            ties,
            total_triplets,
            mode,
        }
    }
}
