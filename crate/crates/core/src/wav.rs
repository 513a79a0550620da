//! Mono audio buffers and 16-bit PCM WAV files.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("{path}: {channels} channels, only mono is supported")]
    UnsupportedChannelCount { path: PathBuf, channels: u16 },
    #[error("{path}: unsupported encoding ({detail}); expected 16-bit integer PCM")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("{path}: corrupt header: {detail}")]
    CorruptHeader { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("sample {index} is {value}, outside [-1, 1] or not finite")]
    SampleOutOfRange { index: usize, value: f32 },
}

/// Mono samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate_hz: u32,
    samples: Vec<f32>,
}

impl AudioBuffer {
    pub fn new(sample_rate_hz: u32, samples: Vec<f32>) -> Result<Self, AudioError> {
        if sample_rate_hz == 0 {
            return Err(AudioError::ZeroSampleRate);
        }
        if let Some(index) = samples
            .iter()
            .position(|v| !v.is_finite() || v.abs() > 1.0)
        {
            return Err(AudioError::SampleOutOfRange {
                index,
                value: samples[index],
            });
        }
        Ok(Self {
            sample_rate_hz,
            samples,
        })
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }
}

fn map_hound(path: &Path, err: hound::Error) -> AudioError {
    let path = path.to_path_buf();
    match err {
        hound::Error::IoError(source) => AudioError::Io { path, source },
        hound::Error::Unsupported => AudioError::UnsupportedEncoding {
            path,
            detail: "format not handled".into(),
        },
        other => AudioError::CorruptHeader {
            path,
            detail: other.to_string(),
        },
    }
}

/// Reads a mono 16-bit PCM WAV; samples are scaled by 1/32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, AudioError> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(AudioError::UnsupportedChannelCount {
            path: path.to_path_buf(),
            channels: spec.channels,
        });
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(AudioError::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: format!("{:?} {}-bit", spec.sample_format, spec.bits_per_sample),
        });
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f32::from(v) / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| map_hound(path, e))?;
    AudioBuffer::new(spec.sample_rate, samples)
}

/// Quantizes to 16 bits (round to nearest, clamped) and writes a canonical
/// 44-byte-header PCM file.
pub fn write_wav(audio: &AudioBuffer, path: impl AsRef<Path>) -> Result<(), AudioError> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in &audio.samples {
        writer
            .write_sample(quantize(s))
            .map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}

pub fn quantize(sample: f32) -> i16 {
    (f64::from(sample) * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}
