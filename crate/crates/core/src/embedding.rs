//! Frame-level embedding files (`.abxe`).
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `b"ABXE"`                |
//! | 4      | 4    | version, u32 (= 1)             |
//! | 8      | 4    | dim, u32                       |
//! | 12     | 8    | n_frames, u64                  |
//! | 20     | 8    | frame_rate_hz, f64             |
//! | 28     | ...  | n_frames * dim f32, frame-major |

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"ABXE";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("bad magic at offset 0: expected \"ABXE\", found {found:?}")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported version {found} at offset 4 (expected {VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("size mismatch: {field} implies {expected} bytes, file has {actual}")]
    SizeMismatch {
        field: &'static str,
        expected: u128,
        actual: u64,
    },
    #[error("non-finite value {value} at frame {frame}, component {component} (byte offset {offset})")]
    NonFiniteValue {
        frame: u64,
        component: u32,
        offset: u64,
        value: f32,
    },
    #[error("dim is zero at offset 8")]
    ZeroDim,
    #[error("frame_rate_hz at offset 20 must be finite and positive, found {found}")]
    BadFrameRate { found: f64 },
    #[error("frames length {len} is not a multiple of dim {dim}")]
    RaggedFrames { len: usize, dim: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Per-frame encoder output for one recording.
///
/// Frames are stored flat, frame-major, exactly as they sit in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    dim: usize,
    frame_rate_hz: f64,
    data: Vec<f32>,
}

impl EmbeddingSequence {
    /// Builds a sequence from flat frame-major data, checking every invariant.
    pub fn new(dim: usize, frame_rate_hz: f64, data: Vec<f32>) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        if dim > u32::MAX as usize {
            return Err(EmbeddingError::SizeMismatch {
                field: "dim",
                expected: dim as u128,
                actual: u32::MAX as u64,
            });
        }
        if !(frame_rate_hz.is_finite() && frame_rate_hz > 0.0) {
            return Err(EmbeddingError::BadFrameRate {
                found: frame_rate_hz,
            });
        }
        if !data.len().is_multiple_of(dim) {
            return Err(EmbeddingError::RaggedFrames {
                len: data.len(),
                dim,
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFiniteValue {
                frame: (i / dim) as u64,
                component: (i % dim) as u32,
                offset: (HEADER_LEN + 4 * i) as u64,
                value: data[i],
            });
        }
        Ok(Self {
            dim,
            frame_rate_hz,
            data,
        })
    }

    /// Builds a sequence from a list of rows. All rows must have the same length.
    pub fn from_frames(frame_rate_hz: f64, frames: &[Vec<f32>]) -> Result<Self, EmbeddingError> {
        let dim = frames.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(dim * frames.len());
        for f in frames {
            if f.len() != dim {
                return Err(EmbeddingError::RaggedFrames { len: f.len(), dim });
            }
            data.extend_from_slice(f);
        }
        Self::new(dim, frame_rate_hz, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_frames(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.frame_rate_hz
    }

    pub fn frame(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    /// Serialized size in bytes.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + 4 * self.data.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.n_frames() as u64).to_le_bytes());
        out.extend_from_slice(&self.frame_rate_hz.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses an in-memory `.abxe` image. Never panics on arbitrary input.
    pub fn decode(bytes: &[u8]) -> Result<Self, EmbeddingError> {
        let header = parse_header(bytes, bytes.len() as u64)?;
        let data: Vec<f32> = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Self::new(header.dim as usize, header.frame_rate_hz, data)
    }
}

/// Header fields of an `.abxe` file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingHeader {
    pub dim: u32,
    pub n_frames: u64,
    pub frame_rate_hz: f64,
}

/// Validates the 28-byte header against the total length of the file.
///
/// `bytes` only needs to hold the header; `total_len` is the full file size.
pub fn parse_header(bytes: &[u8], total_len: u64) -> Result<EmbeddingHeader, EmbeddingError> {
    if bytes.len() < HEADER_LEN {
        // A short file can still show a wrong magic; report that first.
        let n = bytes.len().min(4);
        if bytes[..n] != MAGIC[..n] {
            return Err(EmbeddingError::BadMagic {
                found: bytes[..n].to_vec(),
            });
        }
        return Err(EmbeddingError::SizeMismatch {
            field: "header",
            expected: HEADER_LEN as u128,
            actual: total_len,
        });
    }
    if bytes[0..4] != MAGIC {
        return Err(EmbeddingError::BadMagic {
            found: bytes[0..4].to_vec(),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(EmbeddingError::UnsupportedVersion { found: version });
    }
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let n_frames = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let frame_rate_hz = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if dim == 0 {
        return Err(EmbeddingError::ZeroDim);
    }
    let expected = HEADER_LEN as u128 + 4 * dim as u128 * n_frames as u128;
    if expected != total_len as u128 {
        return Err(EmbeddingError::SizeMismatch {
            field: "dim*n_frames",
            expected,
            actual: total_len,
        });
    }
    if !(frame_rate_hz.is_finite() && frame_rate_hz > 0.0) {
        return Err(EmbeddingError::BadFrameRate {
            found: frame_rate_hz,
        });
    }
    Ok(EmbeddingHeader {
        dim,
        n_frames,
        frame_rate_hz,
    })
}

pub fn read_embedding_file(path: impl AsRef<Path>) -> Result<EmbeddingSequence, EmbeddingError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    EmbeddingSequence::decode(&bytes)
}

/// Checks only the header and file size, without loading the payload.
pub fn probe_embedding_file(path: impl AsRef<Path>) -> Result<EmbeddingHeader, EmbeddingError> {
    use std::io::Read;

    let path = path.as_ref();
    let io_err = |source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::open(path).map_err(io_err)?;
    let total_len = file.metadata().map_err(io_err)?.len();
    let mut header = Vec::with_capacity(HEADER_LEN);
    Read::by_ref(&mut file)
        .take(HEADER_LEN as u64)
        .read_to_end(&mut header)
        .map_err(io_err)?;
    parse_header(&header, total_len)
}

pub fn write_embedding_file(
    seq: &EmbeddingSequence,
    path: impl AsRef<Path>,
) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    let io_err = |source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    w.write_all(&seq.encode()).map_err(io_err)?;
    w.flush().map_err(io_err)
}
