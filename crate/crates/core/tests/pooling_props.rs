use abx_core::snippet::pool_window;
use abx_core::{frames_per_snippet, slice_and_pool, EmbeddingSequence, Pooling, SnippetParams};
use proptest::prelude::*;

fn window() -> impl Strategy<Value = (usize, Vec<Vec<f32>>)> {
    (1usize..8, 1usize..30).prop_flat_map(|(dim, n)| {
        (
            Just(dim),
            proptest::collection::vec(proptest::collection::vec(-100f32..100.0, dim), n),
        )
    })
}

fn flat(frames: &[Vec<f32>]) -> Vec<f32> {
    frames.concat()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn max_pool_permutation_invariant((dim, frames) in window(), seed in any::<u64>()) {
        let mut shuffled = frames.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let a = pool_window(&flat(&frames), dim, Pooling::Max);
        let b = pool_window(&flat(&shuffled), dim, Pooling::Max);
        prop_assert_eq!(a, b);
        let ma = pool_window(&flat(&frames), dim, Pooling::Mean);
        let mb = pool_window(&flat(&shuffled), dim, Pooling::Mean);
        for (x, y) in ma.iter().zip(&mb) {
            prop_assert!((x - y).abs() <= 1e-5 * (1.0 + x.abs()));
        }
    }

    /// Raising any single frame component never lowers the pooled value.
    #[test]
    fn pooling_monotone((dim, frames) in window(), which in any::<prop::sample::Index>(), bump in 0f32..50.0) {
        let mut raised = frames.clone();
        let f = which.index(raised.len() * dim);
        raised[f / dim][f % dim] += bump;
        for pooling in [Pooling::Max, Pooling::Mean] {
            let a = pool_window(&flat(&frames), dim, pooling);
            let b = pool_window(&flat(&raised), dim, pooling);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(y >= x, "{:?}: {} -> {}", pooling, x, y);
            }
        }
    }

    #[test]
    fn max_pool_dominates_every_frame((dim, frames) in window()) {
        let pooled = pool_window(&flat(&frames), dim, Pooling::Max);
        for f in &frames {
            for (p, v) in pooled.iter().zip(f) {
                prop_assert!(p >= v);
            }
        }
        for (d, p) in pooled.iter().enumerate() {
            prop_assert!(frames.iter().any(|f| f[d] == *p));
        }
    }

    #[test]
    fn snippet_count_and_prefix_windows(
        n_frames in 1usize..400,
        rate in 10f64..60.0,
        seconds in 0.2f64..5.0,
    ) {
        let dim = 3;
        let data: Vec<f32> = (0..n_frames * dim).map(|i| ((i * 37) % 101) as f32 + 1.0).collect();
        let seq = EmbeddingSequence::new(dim, rate, data).unwrap();
        let params = SnippetParams::new(seconds, Pooling::Max).unwrap();
        match frames_per_snippet(seconds, rate) {
            Ok(fps) if fps <= n_frames => {
                let set = slice_and_pool("r", &seq, params).unwrap();
                prop_assert_eq!(set.len(), n_frames / fps);
                for k in 0..set.len() {
                    let window = &seq.as_flat()[k * fps * dim..(k + 1) * fps * dim];
                    prop_assert_eq!(set.vector(k), &pool_window(window, dim, Pooling::Max)[..]);
                }
            }
            _ => prop_assert!(slice_and_pool("r", &seq, params).is_err()),
        }
    }
}

#[test]
fn twenty_seconds_at_49_hz_is_980_frames() {
    assert_eq!(frames_per_snippet(20.0, 49.0).unwrap(), 980);
    let seq = EmbeddingSequence::new(2, 49.0, vec![1.0; 2 * 1999]).unwrap();
    let set = slice_and_pool("V1", &seq, SnippetParams::new(20.0, Pooling::Max).unwrap()).unwrap();
    assert_eq!(set.len(), 2);
}
