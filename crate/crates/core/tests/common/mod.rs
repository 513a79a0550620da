#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use abx_core::{cosine_distance, write_embedding_file, EmbeddingSequence, SnippetSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Straight triple loop over `(a, x, b)`; counts `(wins, ties, total)`.
pub fn oracle_counts(s: &SnippetSet, t: &SnippetSet) -> (u64, u64, u64) {
    let (mut wins, mut ties, mut total) = (0, 0, 0);
    for a in 0..s.len() {
        for x in 0..s.len() {
            if x == a {
                continue;
            }
            let dax = cosine_distance(s.vector(a), s.vector(x)).unwrap();
            for b in 0..t.len() {
                let dab = cosine_distance(s.vector(a), t.vector(b)).unwrap();
                total += 1;
                if dax < dab {
                    wins += 1;
                } else if dax == dab {
                    ties += 1;
                }
            }
        }
    }
    (wins, ties, total)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.iter().map(|x| (x / n) as f32).collect();
        }
    }
}

pub fn random_set(id: &str, rng: &mut ChaCha8Rng, n: usize, dim: usize) -> SnippetSet {
    let vs: Vec<Vec<f32>> = (0..n).map(|_| unit_vector(rng, dim)).collect();
    SnippetSet::from_vectors(id, &vs).unwrap()
}

/// `n` points around `center` with isotropic noise of standard deviation `sigma`.
pub fn cluster(id: &str, rng: &mut ChaCha8Rng, center: &[f32], n: usize, sigma: f64) -> SnippetSet {
    let vs: Vec<Vec<f32>> = (0..n)
        .map(|_| center.iter().map(|&c| (c as f64 + sigma * gaussian(rng)) as f32).collect())
        .collect();
    SnippetSet::from_vectors(id, &vs).unwrap()
}

pub fn basis(dim: usize, k: usize) -> Vec<f32> {
    let mut v = vec![0.0; dim];
    v[k] = 1.0;
    v
}

/// Writes `n_frames` of random positive-mean frames per recording at 49
/// frames/s, plus a manifest. Returns the manifest path.
pub fn synthetic_manifest(dir: &Path, ids: &[&str], n_frames: usize, dim: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recordings = Vec::new();
    for (k, id) in ids.iter().enumerate() {
        let offset: Vec<f32> = (0..dim).map(|d| if d % ids.len() == k { 1.0 } else { 0.2 }).collect();
        let mut data = Vec::with_capacity(n_frames * dim);
        for _ in 0..n_frames {
            for &o in &offset {
                data.push(o + 0.5 * gaussian(&mut rng) as f32);
            }
        }
        let seq = EmbeddingSequence::new(dim, 49.0, data).unwrap();
        let file = format!("{id}.abxe");
        write_embedding_file(&seq, dir.join(&file)).unwrap();
        let mut metadata = BTreeMap::new();
        metadata.insert("mic".to_string(), if k % 2 == 0 { "h" } else { "t" }.to_string());
        recordings.push(serde_json::json!({"id": id, "embedding_path": file, "metadata": metadata}));
    }
    let manifest = serde_json::json!({"dataset": "synthetic", "recordings": recordings});
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    path
}

/// Noise bursts shaped like syllables (about 4 per second) separated by
/// short pauses, at 16 kHz.
pub fn speechlike(seed: u64, seconds: f64, sample_rate: u32) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (seconds * sample_rate as f64) as usize;
    let mut out = vec![0.0f32; n];
    let mut pos = 0usize;
    let mut lp = 0.0f64;
    while pos < n {
        let syll = (rng.gen_range(0.12..0.30) * sample_rate as f64) as usize;
        let gap = (rng.gen_range(0.03..0.25) * sample_rate as f64) as usize;
        let amp = 0.3;
        let tilt = 0.5;
        for k in 0..syll.min(n - pos) {
            let env = (std::f64::consts::PI * k as f64 / syll as f64).sin();
            let w = gaussian(&mut rng);
            lp = tilt * lp + (1.0 - tilt) * w;
            out[pos + k] = (amp * env * lp).clamp(-1.0, 1.0) as f32;
        }
        pos += syll + gap;
    }
    out
}

/// Deterministic log-mel-like features: 25 ms Hann frames every 20 ms
/// (50 frames/s), power spectrum pooled into triangular mel bands, log10.
/// Each frame is followed by a context block: the per-band minimum over the
/// surrounding `CONTEXT_FRAMES` frames on either side, so frames see the
/// level of nearby pauses the way a contextual encoder's frames would.
pub struct StubEncoder {
    fft: Arc<dyn Fft<f32>>,
    bands: Vec<Vec<(usize, f32)>>,
    window: Vec<f32>,
    hop: usize,
}

pub const STUB_RATE: f64 = 50.0;
pub const CONTEXT_FRAMES: usize = 12;

impl StubEncoder {
    pub fn new(sample_rate: u32, n_bands: usize) -> Self {
        let win = (0.025 * sample_rate as f64) as usize;
        let hop = (0.020 * sample_rate as f64) as usize;
        let n_fft = win.next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        let window = (0..win)
            .map(|i| (0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / win as f64).cos()) as f32)
            .collect();
        let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
        let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
        let top = mel(sample_rate as f64 / 2.0);
        let edges: Vec<f64> = (0..n_bands + 2).map(|i| hz(top * i as f64 / (n_bands + 1) as f64)).collect();
        let bin_hz = sample_rate as f64 / n_fft as f64;
        let bands = (0..n_bands)
            .map(|b| {
                let (lo, mid, hi) = (edges[b], edges[b + 1], edges[b + 2]);
                (0..=n_fft / 2)
                    .filter_map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = if f > lo && f <= mid {
                            (f - lo) / (mid - lo)
                        } else if f > mid && f < hi {
                            (hi - f) / (hi - mid)
                        } else {
                            0.0
                        };
                        (w > 0.0).then_some((k, w as f32))
                    })
                    .collect()
            })
            .collect();
        Self { fft, bands, window, hop }
    }

    pub fn encode(&self, samples: &[f32]) -> EmbeddingSequence {
        let n_fft = self.fft.len();
        let win = self.window.len();
        let mut data = Vec::new();
        let mut buf = vec![Complex::new(0.0f32, 0.0); n_fft];
        let mut start = 0;
        while start + win <= samples.len() {
            buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
            for i in 0..win {
                buf[i].re = samples[start + i] * self.window[i];
            }
            self.fft.process(&mut buf);
            for band in &self.bands {
                let e: f32 = band.iter().map(|&(k, w)| w * buf[k].norm_sqr()).sum();
                data.push((e + 1e-6).log10());
            }
            start += self.hop;
        }
        let nb = self.bands.len();
        let n = data.len() / nb;
        let mut out = Vec::with_capacity(2 * data.len());
        for t in 0..n {
            out.extend_from_slice(&data[t * nb..(t + 1) * nb]);
            let (lo, hi) = (t.saturating_sub(CONTEXT_FRAMES), (t + CONTEXT_FRAMES + 1).min(n));
            for b in 0..nb {
                let floor = (lo..hi).map(|u| data[u * nb + b]).fold(f32::INFINITY, f32::min);
                out.push(floor);
            }
        }
        EmbeddingSequence::new(2 * nb, STUB_RATE, out).unwrap()
    }
}

pub fn abx_bin() -> &'static str {
    env!("CARGO_BIN_EXE_abx")
}
