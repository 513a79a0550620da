//! Dataset manifests: recording ids, embedding files and free-form metadata.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{probe_embedding_file, EmbeddingError};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed manifest: {source}")]
    ParseError {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate recording id {0:?}")]
    DuplicateRecordingId(String),
    #[error("recording at position {0} has an empty id")]
    EmptyRecordingId(usize),
    #[error("recording {id:?} has an empty metadata key")]
    EmptyMetadataKey { id: String },
    #[error("recording {id:?}: embedding file {path} does not exist")]
    MissingEmbeddingFile { id: String, path: PathBuf },
    #[error("recording {id:?}: {source}")]
    BadEmbeddingFile {
        id: String,
        #[source]
        source: EmbeddingError,
    },
}

/// One row of a manifest, as written in the JSON file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordingEntry {
    pub id: String,
    pub embedding_path: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ManifestFile {
    dataset: String,
    recordings: Vec<RecordingEntry>,
}

/// A validated manifest. Embedding paths are resolved against `base_dir`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub dataset_name: String,
    pub recordings: Vec<RecordingEntry>,
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    /// Validates ids and metadata keys; does not touch the filesystem.
    pub fn new(
        dataset_name: impl Into<String>,
        recordings: Vec<RecordingEntry>,
        base_dir: impl Into<PathBuf>,
    ) -> Result<Self, ManifestError> {
        let mut seen = HashSet::new();
        for (i, r) in recordings.iter().enumerate() {
            if r.id.is_empty() {
                return Err(ManifestError::EmptyRecordingId(i));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(ManifestError::DuplicateRecordingId(r.id.clone()));
            }
            if r.metadata.keys().any(String::is_empty) {
                return Err(ManifestError::EmptyMetadataKey { id: r.id.clone() });
            }
        }
        Ok(Self {
            dataset_name: dataset_name.into(),
            recordings,
            base_dir: base_dir.into(),
        })
    }

    pub fn resolve_path(&self, entry: &RecordingEntry) -> PathBuf {
        self.base_dir.join(&entry.embedding_path)
    }

    pub fn get(&self, id: &str) -> Option<&RecordingEntry> {
        self.recordings.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        let file = ManifestFile {
            dataset: self.dataset_name.clone(),
            recordings: self.recordings.clone(),
        };
        serde_json::to_string_pretty(&file).expect("manifest serializes")
    }
}

/// Loads a manifest and checks that every embedding file exists and carries a
/// consistent header. Payload values are checked when the file is read for scoring.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, ManifestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ManifestFile =
        serde_json::from_str(&text).map_err(|source| ManifestError::ParseError {
            path: path.to_path_buf(),
            source,
        })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let manifest = DatasetManifest::new(file.dataset, file.recordings, base_dir)?;

    for entry in &manifest.recordings {
        let p = manifest.resolve_path(entry);
        if !p.is_file() {
            return Err(ManifestError::MissingEmbeddingFile {
                id: entry.id.clone(),
                path: p,
            });
        }
        probe_embedding_file(&p).map_err(|source| ManifestError::BadEmbeddingFile {
            id: entry.id.clone(),
            source,
        })?;
    }
    Ok(manifest)
}
