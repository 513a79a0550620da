//! Fixed-duration snippets pooled into single vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingSequence;

#[derive(Debug, Error, PartialEq)]
pub enum SnippetError {
    #[error("snippet length must be finite and positive, got {0}")]
    InvalidSnippetSeconds(f64),
    #[error("{snippet_seconds} s at {frame_rate_hz} frames/s covers less than one frame")]
    SnippetShorterThanFrame {
        snippet_seconds: f64,
        frame_rate_hz: f64,
    },
    #[error("snippet of {frames_per_snippet} frames is longer than the recording ({n_frames} frames)")]
    SnippetLongerThanRecording {
        frames_per_snippet: usize,
        n_frames: usize,
    },
    #[error("pooled vector {index} has zero norm")]
    ZeroNormVector { index: usize },
    #[error("unknown pooling {0:?} (expected max or mean)")]
    UnknownPooling(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Max,
    Mean,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Max => "max",
            Pooling::Mean => "mean",
        })
    }
}

impl FromStr for Pooling {
    type Err = SnippetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Pooling::Max),
            "mean" => Ok(Pooling::Mean),
            other => Err(SnippetError::UnknownPooling(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnippetParams {
    pub snippet_seconds: f64,
    pub pooling: Pooling,
}

impl SnippetParams {
    pub fn new(snippet_seconds: f64, pooling: Pooling) -> Result<Self, SnippetError> {
        if !(snippet_seconds.is_finite() && snippet_seconds > 0.0) {
            return Err(SnippetError::InvalidSnippetSeconds(snippet_seconds));
        }
        Ok(Self {
            snippet_seconds,
            pooling,
        })
    }
}

/// Pooled snippet vectors of one recording, in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct SnippetSet {
    pub recording_id: String,
    pub snippet_seconds: f64,
    pub pooling: Pooling,
    pub frames_per_snippet: usize,
    dim: usize,
    data: Vec<f32>,
}

impl SnippetSet {
    /// Wraps already-pooled vectors. Every vector must be finite with nonzero norm.
    /// The snippet length is recorded as 0 (unknown).
    pub fn from_vectors(
        recording_id: impl Into<String>,
        vectors: &[Vec<f32>],
    ) -> Result<Self, SnippetError> {
        let dim = vectors.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(dim * vectors.len());
        for (index, v) in vectors.iter().enumerate() {
            assert_eq!(v.len(), dim, "ragged snippet vectors");
            check_vector(v, index)?;
            data.extend_from_slice(v);
        }
        Ok(Self {
            recording_id: recording_id.into(),
            snippet_seconds: 0.0,
            pooling: Pooling::Max,
            frames_per_snippet: 1,
            dim,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Keeps the vectors whose index satisfies `keep`, preserving order.
    pub fn select(&self, keep: impl Fn(usize) -> bool) -> SnippetSet {
        let data = self
            .vectors()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        SnippetSet {
            data,
            recording_id: self.recording_id.clone(),
            ..*self
        }
    }

    /// Returns a copy with every component multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> SnippetSet {
        SnippetSet {
            data: self.data.iter().map(|v| v * factor).collect(),
            recording_id: self.recording_id.clone(),
            ..*self
        }
    }
}

fn check_vector(v: &[f32], index: usize) -> Result<(), SnippetError> {
    // Finite inputs pool to finite outputs; this guards hand-built sets.
    if v.iter().any(|x| !x.is_finite()) || v.iter().all(|&x| x == 0.0) {
        return Err(SnippetError::ZeroNormVector { index });
    }
    Ok(())
}

/// Number of whole frames covered by one snippet: `floor(seconds * rate)`.
pub fn frames_per_snippet(snippet_seconds: f64, frame_rate_hz: f64) -> Result<usize, SnippetError> {
    if !(snippet_seconds.is_finite() && snippet_seconds > 0.0) {
        return Err(SnippetError::InvalidSnippetSeconds(snippet_seconds));
    }
    let n = (snippet_seconds * frame_rate_hz).floor();
    if n.is_nan() || n < 1.0 {
        return Err(SnippetError::SnippetShorterThanFrame {
            snippet_seconds,
            frame_rate_hz,
        });
    }
    Ok(n as usize)
}

/// Cuts `seq` into consecutive non-overlapping windows and pools each one.
/// A trailing partial window is dropped.
pub fn slice_and_pool(
    recording_id: &str,
    seq: &EmbeddingSequence,
    params: SnippetParams,
) -> Result<SnippetSet, SnippetError> {
    let fps = frames_per_snippet(params.snippet_seconds, seq.frame_rate_hz())?;
    let n_frames = seq.n_frames();
    let count = n_frames / fps;
    if count == 0 {
        return Err(SnippetError::SnippetLongerThanRecording {
            frames_per_snippet: fps,
            n_frames,
        });
    }
    let dim = seq.dim();
    let mut data = Vec::with_capacity(count * dim);
    let flat = seq.as_flat();
    for index in 0..count {
        let window = &flat[index * fps * dim..(index + 1) * fps * dim];
        let pooled = pool_window(window, dim, params.pooling);
        check_vector(&pooled, index)?;
        data.extend_from_slice(&pooled);
    }
    Ok(SnippetSet {
        recording_id: recording_id.to_string(),
        snippet_seconds: params.snippet_seconds,
        pooling: params.pooling,
        frames_per_snippet: fps,
        dim,
        data,
    })
}

/// Component-wise pooling of a flat frame-major window.
pub fn pool_window(window: &[f32], dim: usize, pooling: Pooling) -> Vec<f32> {
    match pooling {
        Pooling::Max => {
            let mut out = vec![f32::NEG_INFINITY; dim];
            for frame in window.chunks_exact(dim) {
                for (o, &v) in out.iter_mut().zip(frame) {
                    *o = o.max(v);
                }
            }
            out
        }
        Pooling::Mean => {
            let n = window.len() / dim;
            let mut acc = vec![0.0f64; dim];
            for frame in window.chunks_exact(dim) {
                for (a, &v) in acc.iter_mut().zip(frame) {
                    *a += f64::from(v);
                }
            }
            acc.into_iter().map(|s| (s / n as f64) as f32).collect()
        }
    }
}
