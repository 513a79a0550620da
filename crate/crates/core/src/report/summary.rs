//! Mean and standard deviation of inter- vs intra-recording scores.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use super::ReportError;
use crate::abx::AbxScoreMatrix;

pub const SAME_RECORDING: &str = "same-recording";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    /// Off-diagonal symmetrized scores.
    InterRecording,
    /// Split-half diagonal scores.
    SameRecording,
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreKind::InterRecording => "inter-recording",
            ScoreKind::SameRecording => SAME_RECORDING,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub group: String,
    pub snippet_seconds: f64,
    pub kind: ScoreKind,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n_pairs: usize,
}

/// A labelled series of score matrices, typically one per snippet length.
#[derive(Debug, Clone)]
pub struct MatrixGroup {
    pub label: String,
    pub matrices: Vec<AbxScoreMatrix>,
}

/// Sorted before summing so the result is independent of input order.
fn mean_std(mut xs: Vec<f64>) -> (f64, f64) {
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    dev.sort_unstable_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / n).sqrt())
}

/// Per group and snippet length: inter-recording stats over all off-diagonal
/// symmetrized scores and same-recording stats over all diagonal scores.
/// Rows come out in group order, then by ascending snippet length.
pub fn summarize(groups: &[MatrixGroup]) -> Result<Vec<SummaryStats>, ReportError> {
    let mut out = Vec::new();
    for group in groups {
        if group.matrices.is_empty() {
            return Err(ReportError::EmptyGroup(group.label.clone()));
        }
        let mut lengths: Vec<f64> = group.matrices.iter().map(|m| m.params.snippet_seconds).collect();
        lengths.sort_unstable_by(f64::total_cmp);
        lengths.dedup();
        for len in lengths {
            let at_len = group.matrices.iter().filter(|m| m.params.snippet_seconds == len);
            let (mut inter, mut intra) = (Vec::new(), Vec::new());
            for m in at_len {
                inter.extend(m.off_diagonal().into_iter().map(|(_, s)| s));
                intra.extend(m.diagonal.iter().flatten().copied());
            }
            for (kind, xs) in [(ScoreKind::InterRecording, inter), (ScoreKind::SameRecording, intra)] {
                if xs.is_empty() {
                    continue;
                }
                let n_pairs = xs.len();
                let (mean, std) = mean_std(xs);
                out.push(SummaryStats {
                    group: group.label.clone(),
                    snippet_seconds: len,
                    kind,
                    mean,
                    std,
                    n_pairs,
                });
            }
        }
    }
    Ok(out)
}

/// `group,snippet_seconds,kind,mean,std,n_pairs`
pub fn summary_csv(rows: &[SummaryStats]) -> String {
    let mut out = String::from("group,snippet_seconds,kind,mean,std,n_pairs\n");
    for r in rows {
        let group = if r.group.contains([',', '"', '\n']) {
            format!("\"{}\"", r.group.replace('"', "\"\""))
        } else {
            r.group.clone()
        };
        writeln!(
            out,
            "{group},{},{},{},{},{}",
            r.snippet_seconds, r.kind, r.mean, r.std, r.n_pairs
        )
        .unwrap();
    }
    out
}
