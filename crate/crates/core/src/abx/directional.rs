use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::distance::Prepared;
use super::{AbxError, AbxMode, AbxResult};
use crate::snippet::SnippetSet;

const SAMPLE_BLOCK: u64 = 1 << 16;

fn check_pair(s: &SnippetSet, t: &SnippetSet) -> Result<(), AbxError> {
    if s.len() < 2 {
        return Err(AbxError::TooFewSnippets {
            id: s.recording_id.clone(),
            needed: 2,
            found: s.len(),
        });
    }
    if t.is_empty() {
        return Err(AbxError::TooFewSnippets {
            id: t.recording_id.clone(),
            needed: 1,
            found: 0,
        });
    }
    if s.dim() != t.dim() {
        return Err(AbxError::DimMismatch {
            left: s.dim(),
            right: t.dim(),
        });
    }
    Ok(())
}

/// Directional ABX score of `s` against `t`.
///
/// Full mode counts every triplet exactly (via [`abx_directional_fast`]);
/// sampled mode draws triplets from a ChaCha8 stream seeded with `seed`.
pub fn abx_directional(
    s: &SnippetSet,
    t: &SnippetSet,
    mode: AbxMode,
) -> Result<AbxResult, AbxError> {
    match mode {
        AbxMode::Full => abx_directional_fast(s, t),
        AbxMode::Sampled { seed, count } => sampled(s, t, seed, count),
    }
}

/// Exact triplet count in `O(|S||T| log |T| + |S|^2 log |T|)` comparisons.
///
/// For each anchor `a`, the distances to `T` are sorted once; every `d(a, x)`
/// is then located by binary search. Anchors run in parallel and only integer
/// counts are reduced, so the result does not depend on the thread count.
pub fn abx_directional_fast(s: &SnippetSet, t: &SnippetSet) -> Result<AbxResult, AbxError> {
    check_pair(s, t)?;
    let ps = Prepared::new(s)?;
    let pt = Prepared::new(t)?;
    let (ns, nt) = (ps.len(), pt.len());

    let (wins, ties) = (0..ns)
        .into_par_iter()
        .map(|a| {
            let mut cross: Vec<f64> = (0..nt).map(|b| ps.distance(a, &pt, b)).collect();
            cross.sort_unstable_by(f64::total_cmp);
            let (mut wins, mut ties) = (0u64, 0u64);
            for x in (0..ns).filter(|&x| x != a) {
                let dax = ps.distance(a, &ps, x);
                let lo = cross.partition_point(|&d| d < dax);
                let hi = lo + cross[lo..].partition_point(|&d| d <= dax);
                wins += (nt - hi) as u64;
                ties += (hi - lo) as u64;
            }
            (wins, ties)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    let total = (ns * (ns - 1) * nt) as u64;
    Ok(AbxResult::from_counts(wins, ties, total, AbxMode::Full))
}

fn sampled(s: &SnippetSet, t: &SnippetSet, seed: u64, count: u64) -> Result<AbxResult, AbxError> {
    check_pair(s, t)?;
    if count == 0 {
        return Err(AbxError::EmptySample);
    }
    let ps = Prepared::new(s)?;
    let pt = Prepared::new(t)?;
    let (ns, nt) = (ps.len() as u64, pt.len() as u64);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut wins, mut ties) = (0u64, 0u64);
    let mut remaining = count;
    let mut block = Vec::with_capacity(SAMPLE_BLOCK.min(count) as usize);
    while remaining > 0 {
        let n = remaining.min(SAMPLE_BLOCK);
        block.clear();
        for _ in 0..n {
            let a = rng.gen_range(0..ns);
            let mut x = rng.gen_range(0..ns - 1);
            if x >= a {
                x += 1;
            }
            let b = rng.gen_range(0..nt);
            block.push((a as usize, x as usize, b as usize));
        }
        let (w, t) = block
            .par_iter()
            .map(|&(a, x, b)| {
                let dax = ps.distance(a, &ps, x);
                let dab = ps.distance(a, &pt, b);
                if dax < dab {
                    (1u64, 0u64)
                } else if dax == dab {
                    (0, 1)
                } else {
                    (0, 0)
                }
            })
            .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
        wins += w;
        ties += t;
        remaining -= n;
    }
    Ok(AbxResult::from_counts(
        wins,
        ties,
        count,
        AbxMode::Sampled { seed, count },
    ))
}

/// Full enumeration with X and B drawn from the same set (`b != a`).
///
/// Triplets `(a, x, b)` and `(a, b, x)` pair off, so without tied distances
/// this is exactly 0.5. Only useful as a diagnostic.
pub fn abx_self_diagnostic(s: &SnippetSet) -> Result<AbxResult, AbxError> {
    if s.len() < 2 {
        return Err(AbxError::TooFewSnippets {
            id: s.recording_id.clone(),
            needed: 2,
            found: s.len(),
        });
    }
    let ps = Prepared::new(s)?;
    let n = ps.len();
    let (wins, ties) = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut others: Vec<f64> = (0..n)
                .filter(|&b| b != a)
                .map(|b| ps.distance(a, &ps, b))
                .collect();
            others.sort_unstable_by(f64::total_cmp);
            let (mut wins, mut ties) = (0u64, 0u64);
            for x in (0..n).filter(|&x| x != a) {
                let dax = ps.distance(a, &ps, x);
                let lo = others.partition_point(|&d| d < dax);
                let hi = lo + others[lo..].partition_point(|&d| d <= dax);
                wins += (others.len() - hi) as u64;
                ties += (hi - lo) as u64;
            }
            (wins, ties)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let total = (n * (n - 1) * (n - 1)) as u64;
    Ok(AbxResult::from_counts(wins, ties, total, AbxMode::Full))
}

/// Split-half self score: even-indexed snippets against odd-indexed ones and
/// back, averaged. Needs at least 4 snippets.
pub fn abx_diagonal(s: &SnippetSet, mode: AbxMode) -> Result<f64, AbxError> {
    if s.len() < 4 {
        return Err(AbxError::TooFewSnippets {
            id: s.recording_id.clone(),
            needed: 4,
            found: s.len(),
        });
    }
    let even = s.select(|i| i % 2 == 0);
    let odd = s.select(|i| i % 2 == 1);
    let fwd = abx_directional(&even, &odd, mode)?;
    let back = abx_directional(&odd, &even, mode)?;
    Ok((fwd.score + back.score) / 2.0)
}

/// Derives a per-pair seed so that every cell of a sampled matrix uses an
/// independent stream regardless of evaluation order.
pub fn pair_seed(seed: u64, i: usize, j: usize) -> u64 {
    let mut z = seed ^ ((i as u64) << 32 | j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(id: &str, v: &[&[f32]]) -> SnippetSet {
        SnippetSet::from_vectors(id, &v.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn worked_example_scores_zero() {
        let h = std::f32::consts::FRAC_1_SQRT_2;
        let s = set("S", &[&[1.0, 0.0], &[0.0, 1.0]]);
        let t = set("T", &[&[h, h]]);
        let r = abx_directional(&s, &t, AbxMode::Full).unwrap();
        assert_eq!((r.wins, r.ties, r.total_triplets), (0, 0, 2));
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn identical_vectors_tie() {
        let s = set("S", &[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        let t = set("T", &[&[1.0, 2.0], &[1.0, 2.0]]);
        let r = abx_directional(&s, &t, AbxMode::Full).unwrap();
        assert_eq!((r.wins, r.ties, r.total_triplets), (0, 12, 12));
        assert_eq!(r.score, 0.5);
        let d = set("S", &[&[3.0f32, 1.0][..]; 6]);
        assert_eq!(abx_diagonal(&d, AbxMode::Full).unwrap(), 0.5);
    }

    #[test]
    fn separated_clusters() {
        let s = set("S", &[&[1.0, 0.01], &[1.0, 0.0], &[1.0, -0.01]]);
        let t = set("T", &[&[0.01, 1.0], &[0.0, 1.0]]);
        assert_eq!(abx_directional(&s, &t, AbxMode::Full).unwrap().score, 1.0);
        assert_eq!(abx_directional(&t, &s, AbxMode::Full).unwrap().score, 1.0);
    }

    #[test]
    fn parity_confound_on_diagonal() {
        let mut v: Vec<Vec<f32>> = Vec::new();
        for i in 0..10 {
            let e = 0.01 * i as f32;
            v.push(if i % 2 == 0 { vec![1.0, e] } else { vec![e, 1.0] });
        }
        let s = SnippetSet::from_vectors("S", &v).unwrap();
        assert!(abx_diagonal(&s, AbxMode::Full).unwrap() > 0.99);
    }

    #[test]
    fn preconditions() {
        let one = set("S", &[&[1.0, 0.0]]);
        let two = set("T", &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            abx_directional(&one, &two, AbxMode::Full),
            Err(AbxError::TooFewSnippets { needed: 2, .. })
        ));
        let other = set("U", &[&[1.0, 0.0, 0.0]]);
        assert!(matches!(
            abx_directional(&two, &other, AbxMode::Full),
            Err(AbxError::DimMismatch { .. })
        ));
        assert!(matches!(
            abx_diagonal(&two, AbxMode::Full),
            Err(AbxError::TooFewSnippets { needed: 4, .. })
        ));
        assert!(matches!(
            abx_directional(&two, &two, AbxMode::Sampled { seed: 1, count: 0 }),
            Err(AbxError::EmptySample)
        ));
    }

    #[test]
    fn sampled_is_seed_deterministic() {
        let v: Vec<Vec<f32>> = (0..20).map(|i| vec![1.0 + i as f32, (i * i) as f32 % 7.0 + 0.5]).collect();
        let s = SnippetSet::from_vectors("S", &v[..10]).unwrap();
        let t = SnippetSet::from_vectors("T", &v[10..]).unwrap();
        let mode = AbxMode::Sampled { seed: 42, count: 100_000 };
        let a = abx_directional(&s, &t, mode).unwrap();
        let b = abx_directional(&s, &t, mode).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_triplets, 100_000);
        let full = abx_directional(&s, &t, AbxMode::Full).unwrap();
        assert!((a.score - full.score).abs() < 0.01, "{} vs {}", a.score, full.score);
    }

    #[test]
    fn pair_seeds_differ() {
        assert_ne!(pair_seed(1, 0, 1), pair_seed(1, 1, 0));
        assert_ne!(pair_seed(1, 0, 1), pair_seed(2, 0, 1));
        assert_eq!(pair_seed(7, 3, 4), pair_seed(7, 3, 4));
    }
}
