use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::directional::{abx_diagonal, abx_directional, pair_seed};
use super::{AbxError, AbxMode, AbxResult};
use crate::embedding::read_embedding_file;
use crate::manifest::DatasetManifest;
use crate::snippet::{slice_and_pool, Pooling, SnippetParams, SnippetSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixParams {
    pub snippet_seconds: f64,
    pub pooling: Pooling,
    pub mode: AbxMode,
}

/// Pairwise ABX scores between recordings.
///
/// `directional[(i, j)]` scores recording `i` as the A/X source against `j` as B.
/// The symmetrized score of `{i, j}` is the mean of both directions. The
/// diagonal holds split-half self scores, absent for recordings with fewer
/// than four snippets.
#[derive(Debug, Clone, PartialEq)]
pub struct AbxScoreMatrix {
    pub params: MatrixParams,
    pub recording_ids: Vec<String>,
    pub directional: BTreeMap<(usize, usize), AbxResult>,
    pub diagonal: Vec<Option<f64>>,
}

impl AbxScoreMatrix {
    pub fn len(&self) -> usize {
        self.recording_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recording_ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.recording_ids.iter().position(|r| r == id)
    }

    /// Mean of both directional scores; `None` on the diagonal or out of range.
    pub fn symmetrized(&self, i: usize, j: usize) -> Option<f64> {
        let a = self.directional.get(&(i, j))?;
        let b = self.directional.get(&(j, i))?;
        Some((a.score + b.score) / 2.0)
    }

    /// Symmetrized scores of all unordered pairs `i < j`, row-major.
    pub fn off_diagonal(&self) -> Vec<((usize, usize), f64)> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                if let Some(s) = self.symmetrized(i, j) {
                    out.push(((i, j), s));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let ids = &self.recording_ids;
        let (max_triplets, seed) = match self.params.mode {
            AbxMode::Full => (None, None),
            AbxMode::Sampled { seed, count } => (Some(count), Some(seed)),
        };
        let file = MatrixFile {
            params: ParamsFile {
                snippet_seconds: self.params.snippet_seconds,
                pooling: self.params.pooling,
                mode: match self.params.mode {
                    AbxMode::Full => "full".into(),
                    AbxMode::Sampled { .. } => "sampled".into(),
                },
                max_triplets,
                seed,
            },
            recordings: ids.clone(),
            directional: self
                .directional
                .iter()
                .map(|(&(i, j), r)| DirectionalFile {
                    a: ids[i].clone(),
                    b: ids[j].clone(),
                    score: r.score,
                    wins: r.wins,
                    ties: r.ties,
                    total: r.total_triplets,
                })
                .collect(),
            symmetrized: self
                .off_diagonal()
                .into_iter()
                .map(|((i, j), score)| SymmetrizedFile {
                    pair: [ids[i].clone(), ids[j].clone()],
                    score,
                })
                .collect(),
            diagonal: self
                .diagonal
                .iter()
                .enumerate()
                .filter_map(|(i, d)| {
                    d.map(|score| DiagonalFile {
                        id: ids[i].clone(),
                        score,
                    })
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("matrix serializes");
        s.push('\n');
        s
    }

    /// Parses the JSON written by [`to_json`](Self::to_json), checking that the
    /// stored symmetrized scores agree with the directional ones.
    pub fn from_json(text: &str) -> Result<Self, AbxError> {
        let bad = |m: String| AbxError::InconsistentMatrix(m);
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let mode = match (file.params.mode.as_str(), file.params.seed, file.params.max_triplets) {
            ("full", _, _) => AbxMode::Full,
            ("sampled", Some(seed), Some(count)) => AbxMode::Sampled { seed, count },
            (m, _, _) => return Err(bad(format!("unknown or incomplete mode {m:?}"))),
        };
        let ids = file.recordings;
        let index = |id: &str| {
            ids.iter()
                .position(|r| r == id)
                .ok_or_else(|| bad(format!("unknown recording {id:?}")))
        };
        let mut directional = BTreeMap::new();
        for d in &file.directional {
            let (i, j) = (index(&d.a)?, index(&d.b)?);
            if i == j || d.total == 0 || d.wins + d.ties > d.total {
                return Err(bad(format!("invalid directional entry {} -> {}", d.a, d.b)));
            }
            let r = AbxResult::from_counts(d.wins, d.ties, d.total, mode_for(mode, i, j));
            if (r.score - d.score).abs() > 1e-12 {
                return Err(bad(format!("score of {} -> {} disagrees with counts", d.a, d.b)));
            }
            directional.insert((i, j), r);
        }
        let mut diagonal = vec![None; ids.len()];
        for d in &file.diagonal {
            let score = d.score;
            if !(0.0..=1.0).contains(&score) {
                return Err(bad(format!("diagonal of {} out of range", d.id)));
            }
            diagonal[index(&d.id)?] = Some(score);
        }
        let matrix = AbxScoreMatrix {
            params: MatrixParams {
                snippet_seconds: file.params.snippet_seconds,
                pooling: file.params.pooling,
                mode,
            },
            recording_ids: ids.clone(),
            directional,
            diagonal,
        };
        for s in &file.symmetrized {
            let (i, j) = (index(&s.pair[0])?, index(&s.pair[1])?);
            match matrix.symmetrized(i, j) {
                Some(v) if (v - s.score).abs() <= 1e-12 => {}
                _ => return Err(bad(format!("symmetrized {:?} disagrees", s.pair))),
            }
        }
        Ok(matrix)
    }

    /// Square CSV: symmetrized scores off the diagonal, split-half scores on it.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.recording_ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&csv_field(&self.recording_ids[i]));
            for j in 0..self.len() {
                out.push(',');
                let v = if i == j {
                    self.diagonal[i]
                } else {
                    self.symmetrized(i, j)
                };
                if let Some(v) = v {
                    write!(out, "{v}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    snippet_seconds: f64,
    pooling: Pooling,
    mode: String,
    max_triplets: Option<u64>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct DirectionalFile {
    a: String,
    b: String,
    score: f64,
    wins: u64,
    ties: u64,
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct SymmetrizedFile {
    pair: [String; 2],
    score: f64,
}

#[derive(Serialize, Deserialize)]
struct DiagonalFile {
    id: String,
    score: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    params: ParamsFile,
    recordings: Vec<String>,
    directional: Vec<DirectionalFile>,
    symmetrized: Vec<SymmetrizedFile>,
    diagonal: Vec<DiagonalFile>,
}

fn mode_for(mode: AbxMode, i: usize, j: usize) -> AbxMode {
    match mode {
        AbxMode::Full => AbxMode::Full,
        AbxMode::Sampled { seed, count } => AbxMode::Sampled {
            seed: pair_seed(seed, i, j),
            count,
        },
    }
}

/// Scores every ordered pair of `sets`. Fails on the first bad pair, in
/// row-major order, so the reported error does not depend on scheduling.
pub fn score_matrix_from_sets(
    sets: &[SnippetSet],
    params: SnippetParams,
    mode: AbxMode,
) -> Result<AbxScoreMatrix, AbxError> {
    let n = sets.len();
    if n < 2 {
        return Err(AbxError::TooFewRecordings(n));
    }
    for s in sets {
        if s.len() < 2 {
            return Err(AbxError::TooFewSnippets {
                id: s.recording_id.clone(),
                needed: 2,
                found: s.len(),
            });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<AbxResult, AbxError>> = pairs
        .par_iter()
        .map(|&(i, j)| abx_directional(&sets[i], &sets[j], mode_for(mode, i, j)))
        .collect();
    let mut directional = BTreeMap::new();
    for (&(i, j), r) in pairs.iter().zip(results) {
        let r = r.map_err(|e| AbxError::Pair {
            a: sets[i].recording_id.clone(),
            b: sets[j].recording_id.clone(),
            source: Box::new(e),
        })?;
        directional.insert((i, j), r);
    }
    let diagonal = sets
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if s.len() < 4 {
                Ok(None)
            } else {
                abx_diagonal(s, mode_for(mode, i, i)).map(Some)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(AbxScoreMatrix {
        params: MatrixParams {
            snippet_seconds: params.snippet_seconds,
            pooling: params.pooling,
            mode,
        },
        recording_ids: sets.iter().map(|s| s.recording_id.clone()).collect(),
        directional,
        diagonal,
    })
}

/// Loads and pools every recording of `manifest`, then scores all pairs.
pub fn score_matrix(
    manifest: &DatasetManifest,
    params: SnippetParams,
    mode: AbxMode,
) -> Result<AbxScoreMatrix, AbxError> {
    if manifest.recordings.len() < 2 {
        return Err(AbxError::TooFewRecordings(manifest.recordings.len()));
    }
    let sets = manifest
        .recordings
        .par_iter()
        .map(|entry| {
            let seq = read_embedding_file(manifest.resolve_path(entry)).map_err(|source| {
                AbxError::Load {
                    id: entry.id.clone(),
                    source,
                }
            })?;
            slice_and_pool(&entry.id, &seq, params).map_err(|source| AbxError::Snippet {
                id: entry.id.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    score_matrix_from_sets(&sets, params, mode)
}
