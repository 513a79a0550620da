//! Cosine distance with f64 accumulation over f32 inputs.
//!
//! Every distance in the engine goes through [`dot`] and [`distance_from_parts`],
//! so the same pair of vectors always produces the same bits no matter which
//! path (exhaustive, sorted, sampled) asked for it. Tie detection relies on that.

use super::AbxError;
use crate::snippet::SnippetSet;

const LANES: usize = 8;

/// Dot product with a fixed summation order: eight interleaved partial sums,
/// folded left to right, then the remainder.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += x[l] * y[l];
        }
    }
    let mut sum = acc.iter().fold(0.0, |s, v| s + v);
    for (x, y) in ra.iter().zip(rb) {
        sum += x * y;
    }
    sum
}

#[inline]
pub(crate) fn distance_from_parts(dot_uv: f64, norm_u: f64, norm_v: f64) -> f64 {
    1.0 - dot_uv / (norm_u * norm_v)
}

/// `1 - u.v / (|u| |v|)`, in `[0, 2]` up to rounding.
pub fn cosine_distance(u: &[f32], v: &[f32]) -> Result<f64, AbxError> {
    if u.len() != v.len() {
        return Err(AbxError::DimMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let u: Vec<f64> = u.iter().map(|&x| f64::from(x)).collect();
    let v: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
    let nu = dot(&u, &u).sqrt();
    let nv = dot(&v, &v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(AbxError::ZeroNorm);
    }
    Ok(distance_from_parts(dot(&u, &v), nu, nv))
}

/// A snippet set widened to f64 with norms cached.
pub(crate) struct Prepared {
    pub dim: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl Prepared {
    pub fn new(set: &SnippetSet) -> Result<Self, AbxError> {
        let dim = set.dim();
        let data: Vec<f64> = set
            .vectors()
            .flat_map(|v| v.iter().map(|&x| f64::from(x)))
            .collect();
        let norms: Vec<f64> = data
            .chunks_exact(dim.max(1))
            .map(|v| dot(v, v).sqrt())
            .collect();
        if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) {
            return Err(AbxError::ZeroNorm);
        }
        Ok(Self { dim, data, norms })
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn distance(&self, i: usize, other: &Prepared, j: usize) -> f64 {
        distance_from_parts(dot(self.row(i), other.row(j)), self.norms[i], other.norms[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let d = cosine_distance(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((d - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!((d - 0.29289).abs() < 1e-5);
        let u = [0.3f32, -2.0, 5.5, 1e-3, 7.0, 0.0, 1.0, 2.0, 3.0, 4.0, -1.0];
        assert!(cosine_distance(&u, &u).unwrap().abs() < 1e-15);
        assert!((cosine_distance(&[1.0], &[-1.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            cosine_distance(&[1.0], &[1.0, 2.0]),
            Err(AbxError::DimMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            cosine_distance(&[0.0, 0.0], &[1.0, 2.0]),
            Err(AbxError::ZeroNorm)
        ));
    }

    #[test]
    fn prepared_matches_public_distance_bitwise() {
        let a = SnippetSet::from_vectors("a", &[vec![0.1, 0.2, 0.3], vec![1.0, -1.0, 0.5]]).unwrap();
        let b = SnippetSet::from_vectors("b", &[vec![3.0, 0.0, 1.0]]).unwrap();
        let (pa, pb) = (Prepared::new(&a).unwrap(), Prepared::new(&b).unwrap());
        for i in 0..2 {
            let want = cosine_distance(a.vector(i), b.vector(0)).unwrap();
            assert_eq!(pa.distance(i, &pb, 0).to_bits(), want.to_bits());
        }
    }
}
