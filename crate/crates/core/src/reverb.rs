//! Artificial room tone: a Schroeder reverberator with four parallel feedback
//! combs feeding two series allpasses, blended with the dry signal.

use thiserror::Error;

use crate::wav::AudioBuffer;

/// Comb delays in milliseconds.
pub const COMB_DELAYS_MS: [f64; 4] = [29.7, 37.1, 41.1, 43.7];
/// Allpass delays in milliseconds.
pub const ALLPASS_DELAYS_MS: [f64; 2] = [5.0, 1.7];
pub const ALLPASS_GAIN: f64 = 0.7;
pub const DEFAULT_DECAY_SECONDS: f64 = 1.2;

#[derive(Debug, Error, PartialEq)]
pub enum ReverbError {
    #[error("wet mix {0} outside [0, 1]")]
    InvalidWet(f64),
    #[error("decay must be finite and positive, got {0} s")]
    InvalidDecay(f64),
    #[error("input audio is empty")]
    EmptyAudio,
    #[error("only mono audio is supported, got {0} channels")]
    UnsupportedChannelCount(u16),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverbParams {
    wet: f64,
    decay_seconds: f64,
}

impl ReverbParams {
    pub fn new(wet: f64, decay_seconds: f64) -> Result<Self, ReverbError> {
        if !(0.0..=1.0).contains(&wet) {
            return Err(ReverbError::InvalidWet(wet));
        }
        if !(decay_seconds.is_finite() && decay_seconds > 0.0) {
            return Err(ReverbError::InvalidDecay(decay_seconds));
        }
        Ok(Self { wet, decay_seconds })
    }

    /// `N %` reverb maps to `wet = N / 100` with the default decay.
    pub fn from_percent(percent: f64) -> Result<Self, ReverbError> {
        Self::new(percent / 100.0, DEFAULT_DECAY_SECONDS)
    }

    pub fn wet(&self) -> f64 {
        self.wet
    }

    pub fn decay_seconds(&self) -> f64 {
        self.decay_seconds
    }

    /// Feedback gain of each comb so that it decays by 60 dB over `decay_seconds`.
    pub fn comb_gains(&self) -> [f64; 4] {
        COMB_DELAYS_MS.map(|ms| 10f64.powf(-3.0 * (ms / 1000.0) / self.decay_seconds))
    }

    pub fn tail_samples(&self, sample_rate_hz: u32) -> usize {
        (self.decay_seconds * sample_rate_hz as f64).ceil() as usize
    }
}

impl Default for ReverbParams {
    fn default() -> Self {
        Self {
            wet: 0.0,
            decay_seconds: DEFAULT_DECAY_SECONDS,
        }
    }
}

fn delay_samples(ms: f64, sample_rate_hz: u32) -> usize {
    ((ms / 1000.0 * sample_rate_hz as f64).round() as usize).max(1)
}

/// `y[n] = x[n - D] + g y[n - D]`
struct Comb {
    buf: Vec<f64>,
    pos: usize,
    gain: f64,
}

impl Comb {
    fn process(&mut self, input: f64) -> f64 {
        let out = self.buf[self.pos];
        self.buf[self.pos] = input + self.gain * out;
        self.pos = (self.pos + 1) % self.buf.len();
        out
    }
}

/// `H(z) = (z^-D - g) / (1 - g z^-D)`
struct Allpass {
    buf: Vec<f64>,
    pos: usize,
    gain: f64,
}

impl Allpass {
    fn process(&mut self, input: f64) -> f64 {
        let delayed = self.buf[self.pos];
        let w = input + self.gain * delayed;
        self.buf[self.pos] = w;
        self.pos = (self.pos + 1) % self.buf.len();
        delayed - self.gain * w
    }
}

/// The fully wet response of the reverberator to `input` followed by `tail`
/// zeros, before mixing.
pub fn reverberate(input: &[f32], sample_rate_hz: u32, params: &ReverbParams, tail: usize) -> Vec<f64> {
    let mut combs: Vec<Comb> = COMB_DELAYS_MS
        .iter()
        .zip(params.comb_gains())
        .map(|(&ms, gain)| Comb {
            buf: vec![0.0; delay_samples(ms, sample_rate_hz)],
            pos: 0,
            gain,
        })
        .collect();
    let mut allpasses: Vec<Allpass> = ALLPASS_DELAYS_MS
        .iter()
        .map(|&ms| Allpass {
            buf: vec![0.0; delay_samples(ms, sample_rate_hz)],
            pos: 0,
            gain: ALLPASS_GAIN,
        })
        .collect();

    let drive = input
        .iter()
        .map(|&x| f64::from(x))
        .chain(std::iter::repeat_n(0.0, tail));
    drive
        .map(|x| {
            let mut y = 0.25 * combs.iter_mut().fold(0.0, |acc, c| acc + c.process(x));
            for ap in &mut allpasses {
                y = ap.process(y);
            }
            y
        })
        .collect()
}

/// Mixes `(1 - wet) * dry + wet * reverberated` over the input plus a
/// `ceil(decay * rate)`-sample tail. The result is scaled down by its peak
/// only when some sample would exceed 1 in magnitude.
pub fn apply_reverb(audio: &AudioBuffer, params: &ReverbParams) -> Result<AudioBuffer, ReverbError> {
    if audio.is_empty() {
        return Err(ReverbError::EmptyAudio);
    }
    let mixed = mix(audio, params);
    let peak = mixed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 1.0 { 1.0 / peak } else { 1.0 };
    let samples = mixed.into_iter().map(|v| (v * scale) as f32).collect();
    Ok(AudioBuffer::new(audio.sample_rate_hz(), samples).expect("normalized output is in range"))
}

/// The mix before peak normalization.
pub fn mix(audio: &AudioBuffer, params: &ReverbParams) -> Vec<f64> {
    let tail = params.tail_samples(audio.sample_rate_hz());
    let dry = audio.samples();
    if params.wet == 0.0 {
        return dry
            .iter()
            .map(|&x| f64::from(x))
            .chain(std::iter::repeat_n(0.0, tail))
            .collect();
    }
    let wet = reverberate(dry, audio.sample_rate_hz(), params, tail);
    wet.into_iter()
        .enumerate()
        .map(|(n, r)| {
            let d = dry.get(n).map_or(0.0, |&x| f64::from(x));
            (1.0 - params.wet) * d + params.wet * r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulse(n: usize) -> AudioBuffer {
        let mut s = vec![0.0; n];
        s[0] = 1.0;
        AudioBuffer::new(16000, s).unwrap()
    }

    fn noise(n: usize, seed: u64) -> Vec<f32> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 40) as f32 / (1u64 << 24) as f32) * 1.6 - 0.8
            })
            .collect()
    }

    #[test]
    fn params_validation() {
        assert!(ReverbParams::new(1.2, 1.0).is_err());
        assert!(ReverbParams::new(-0.1, 1.0).is_err());
        assert!(ReverbParams::new(0.5, 0.0).is_err());
        let p = ReverbParams::from_percent(15.0).unwrap();
        assert!((p.wet() - 0.15).abs() < 1e-12);
        for g in p.comb_gains() {
            assert!(g > 0.0 && g < 1.0);
        }
    }

    #[test]
    fn zero_wet_is_identity_plus_silence() {
        let input = AudioBuffer::new(16000, noise(4000, 1)).unwrap();
        let p = ReverbParams::new(0.0, 1.2).unwrap();
        let out = apply_reverb(&input, &p).unwrap();
        assert_eq!(out.len(), 4000 + 19200);
        assert_eq!(&out.samples()[..4000], input.samples());
        assert!(out.samples()[4000..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impulse_response() {
        let p = ReverbParams::new(0.2, 1.2).unwrap();
        let out = apply_reverb(&impulse(100), &p).unwrap();
        assert_eq!(out.samples()[0], 0.8);
        let after_100ms = &out.samples()[1600..];
        let energy: f64 = after_100ms.iter().map(|&v| f64::from(v).powi(2)).sum();
        assert!(energy > 0.0);
    }

    #[test]
    fn empty_audio_rejected() {
        let empty = AudioBuffer::new(16000, vec![]).unwrap();
        assert_eq!(
            apply_reverb(&empty, &ReverbParams::default()),
            Err(ReverbError::EmptyAudio)
        );
    }

    #[test]
    fn linear_before_normalization() {
        let x = AudioBuffer::new(16000, noise(2000, 3)).unwrap();
        let half = AudioBuffer::new(16000, x.samples().iter().map(|v| v * 0.5).collect()).unwrap();
        let p = ReverbParams::new(0.3, 0.5).unwrap();
        let (a, b) = (mix(&x, &p), mix(&half, &p));
        for (u, v) in a.iter().zip(&b) {
            assert_eq!(u * 0.5, *v);
        }
        let third = AudioBuffer::new(16000, x.samples().iter().map(|v| v * -0.3).collect()).unwrap();
        let c = mix(&third, &p);
        for (u, v) in a.iter().zip(&c) {
            assert!((u * -0.3 - v).abs() < 1e-6);
        }
    }

    #[test]
    fn deterministic() {
        let x = AudioBuffer::new(16000, noise(3000, 5)).unwrap();
        let p = ReverbParams::new(0.1, 1.2).unwrap();
        assert_eq!(apply_reverb(&x, &p).unwrap(), apply_reverb(&x, &p).unwrap());
    }
}
