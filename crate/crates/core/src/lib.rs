//! ABX discriminability probing of pooled speech representations.
//!
//! Frame-level encoder outputs (`.abxe` files listed in a manifest) are cut
//! into fixed-length snippets, pooled into one vector per snippet, and compared
//! recording against recording with cosine-distance ABX triplets. Results are
//! written as score matrices (JSON/CSV), SVG heatmaps and summary tables.
//! A small Schroeder reverberator prepares room-tone augmentation inputs.

pub mod abx;
pub mod commands;
pub mod embedding;
pub mod manifest;
pub mod report;
pub mod reverb;
pub mod snippet;
pub mod wav;

use std::path::PathBuf;

use thiserror::Error;

pub use abx::{
    abx_diagonal, abx_directional, abx_directional_fast, cosine_distance, group_contrast,
    score_matrix, score_matrix_from_sets, AbxError, AbxMode, AbxResult, AbxScoreMatrix,
};
pub use embedding::{read_embedding_file, write_embedding_file, EmbeddingError, EmbeddingSequence};
pub use manifest::{load_manifest, DatasetManifest, ManifestError, RecordingEntry};
pub use report::{render_heatmap, summarize, ReportError, SummaryStats};
pub use reverb::{apply_reverb, ReverbError, ReverbParams};
pub use snippet::{frames_per_snippet, slice_and_pool, Pooling, SnippetError, SnippetParams, SnippetSet};
pub use wav::{read_wav, write_wav, AudioBuffer, AudioError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Snippet(#[from] SnippetError),
    #[error(transparent)]
    Abx(#[from] AbxError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Reverb(#[from] ReverbError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

/// Process exit status for usage errors.
pub const EXIT_USAGE: i32 = 2;
/// Process exit status for bad or missing input data.
pub const EXIT_DATA: i32 = 3;
/// Process exit status for failures while computing scores.
pub const EXIT_COMPUTE: i32 = 4;

impl Error {
    /// Stable snake_case identifier, printed after `ERROR`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Embedding(e) => embedding_code(e),
            Error::Manifest(e) => match e {
                ManifestError::Io { .. } => "io_failure",
                ManifestError::ParseError { .. } => "parse_error",
                ManifestError::DuplicateRecordingId(_) => "duplicate_recording_id",
                ManifestError::EmptyRecordingId(_) => "empty_recording_id",
                ManifestError::EmptyMetadataKey { .. } => "empty_metadata_key",
                ManifestError::MissingEmbeddingFile { .. } => "missing_embedding_file",
                ManifestError::BadEmbeddingFile { source, .. } => embedding_code(source),
            },
            Error::Snippet(e) => snippet_code(e),
            Error::Abx(e) => abx_code(e),
            Error::Audio(e) => match e {
                AudioError::UnsupportedChannelCount { .. } => "unsupported_channel_count",
                AudioError::UnsupportedEncoding { .. } => "unsupported_encoding",
                AudioError::CorruptHeader { .. } => "corrupt_header",
                AudioError::Io { .. } => "io_failure",
                AudioError::ZeroSampleRate => "zero_sample_rate",
                AudioError::SampleOutOfRange { .. } => "sample_out_of_range",
            },
            Error::Reverb(e) => match e {
                ReverbError::InvalidWet(_) => "invalid_wet",
                ReverbError::InvalidDecay(_) => "invalid_decay",
                ReverbError::EmptyAudio => "empty_audio",
                ReverbError::UnsupportedChannelCount(_) => "unsupported_channel_count",
            },
            Error::Report(ReportError::EmptyGroup(_)) => "empty_group",
            Error::Io { .. } => "io_failure",
            Error::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_)
            | Error::Reverb(ReverbError::InvalidWet(_) | ReverbError::InvalidDecay(_))
            | Error::Snippet(SnippetError::InvalidSnippetSeconds(_) | SnippetError::UnknownPooling(_)) => {
                EXIT_USAGE
            }
            Error::Embedding(_)
            | Error::Manifest(_)
            | Error::Snippet(_)
            | Error::Audio(_)
            | Error::Reverb(_)
            | Error::Io { .. } => EXIT_DATA,
            Error::Abx(e) => abx_exit(e),
            Error::Report(_) => EXIT_COMPUTE,
        }
    }
}

fn embedding_code(e: &EmbeddingError) -> &'static str {
    match e {
        EmbeddingError::BadMagic { .. } => "bad_magic",
        EmbeddingError::UnsupportedVersion { .. } => "unsupported_version",
        EmbeddingError::SizeMismatch { .. } => "size_mismatch",
        EmbeddingError::NonFiniteValue { .. } => "non_finite_value",
        EmbeddingError::ZeroDim => "zero_dim",
        EmbeddingError::BadFrameRate { .. } => "bad_frame_rate",
        EmbeddingError::RaggedFrames { .. } => "ragged_frames",
        EmbeddingError::Io { .. } => "io_failure",
    }
}

fn snippet_code(e: &SnippetError) -> &'static str {
    match e {
        SnippetError::InvalidSnippetSeconds(_) => "invalid_snippet_seconds",
        SnippetError::SnippetShorterThanFrame { .. } => "snippet_shorter_than_frame",
        SnippetError::SnippetLongerThanRecording { .. } => "snippet_longer_than_recording",
        SnippetError::ZeroNormVector { .. } => "zero_norm_vector",
        SnippetError::UnknownPooling(_) => "unknown_pooling",
    }
}

fn abx_code(e: &AbxError) -> &'static str {
    match e {
        AbxError::DimMismatch { .. } => "dim_mismatch",
        AbxError::ZeroNorm => "zero_norm",
        AbxError::TooFewSnippets { .. } => "too_few_snippets",
        AbxError::TooFewRecordings(_) => "too_few_recordings",
        AbxError::EmptySample => "empty_sample",
        AbxError::Pair { source, .. } => abx_code(source),
        AbxError::Load { source, .. } => embedding_code(source),
        AbxError::Snippet { source, .. } => snippet_code(source),
        AbxError::UnknownKey(_) => "unknown_key",
        AbxError::SingleValue { .. } => "single_value",
        AbxError::InconsistentMatrix(_) => "inconsistent_matrix",
    }
}

fn abx_exit(e: &AbxError) -> i32 {
    match e {
        AbxError::Load { .. } | AbxError::Snippet { .. } | AbxError::InconsistentMatrix(_) => {
            EXIT_DATA
        }
        AbxError::Pair { source, .. } => abx_exit(source),
        _ => EXIT_COMPUTE,
    }
}
