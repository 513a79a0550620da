use std::collections::BTreeMap;

use serde::Serialize;

use super::{AbxError, AbxScoreMatrix};
use crate::manifest::DatasetManifest;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuePairMean {
    pub values: [String; 2],
    pub mean: f64,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueMean {
    pub value: String,
    /// `None` when only one recording carries this value.
    pub mean: Option<f64>,
    pub n_pairs: usize,
}

/// Mean symmetrized scores grouped by the values of one metadata key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupContrast {
    pub key: String,
    pub cross: Vec<ValuePairMean>,
    pub within: Vec<ValueMean>,
}

/// Averages the symmetrized scores of recording pairs by metadata value:
/// one mean for every pair of distinct values and one for pairs sharing a value.
/// Recordings without `key` are left out.
pub fn group_contrast(
    matrix: &AbxScoreMatrix,
    manifest: &DatasetManifest,
    key: &str,
) -> Result<GroupContrast, AbxError> {
    let values: Vec<Option<&str>> = matrix
        .recording_ids
        .iter()
        .map(|id| {
            manifest
                .get(id)
                .and_then(|r| r.metadata.get(key))
                .map(String::as_str)
        })
        .collect();

    let mut distinct: Vec<&str> = values.iter().flatten().copied().collect();
    distinct.sort_unstable();
    distinct.dedup();
    match distinct.len() {
        0 => return Err(AbxError::UnknownKey(key.to_string())),
        1 => {
            return Err(AbxError::SingleValue {
                key: key.to_string(),
                value: distinct[0].to_string(),
            })
        }
        _ => {}
    }

    let mut sums: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
    for ((i, j), score) in matrix.off_diagonal() {
        let (Some(vi), Some(vj)) = (values[i], values[j]) else {
            continue;
        };
        let k = if vi <= vj { (vi, vj) } else { (vj, vi) };
        let e = sums.entry(k).or_insert((0.0, 0));
        e.0 += score;
        e.1 += 1;
    }

    let mut cross = Vec::new();
    for (a, &va) in distinct.iter().enumerate() {
        for &vb in &distinct[a + 1..] {
            if let Some(&(sum, n)) = sums.get(&(va, vb)) {
                cross.push(ValuePairMean {
                    values: [va.to_string(), vb.to_string()],
                    mean: sum / n as f64,
                    n_pairs: n,
                });
            }
        }
    }
    let within = distinct
        .iter()
        .map(|&v| {
            let (sum, n) = sums.get(&(v, v)).copied().unwrap_or((0.0, 0));
            ValueMean {
                value: v.to_string(),
                mean: (n > 0).then(|| sum / n as f64),
                n_pairs: n,
            }
        })
        .collect();

    Ok(GroupContrast {
        key: key.to_string(),
        cross,
        within,
    })
}
