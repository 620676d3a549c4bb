use crate::interchange::EmbeddingVector;

use super::StoreError;

/// Dot product with 64-bit accumulation over 32-bit components.
#[inline]
pub(crate) fn dot64(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

#[inline]
pub(crate) fn norm64(a: &[f32]) -> f64 {
    dot64(a, a).sqrt()
}

/// The scan kernel. Every distance the store reports goes through here so
/// that stored norms and freshly computed norms produce identical bits.
#[inline]
pub(crate) fn distance_with_norms(a: &[f32], a_norm: f64, b: &[f32], b_norm: f64) -> f64 {
    let cos = dot64(a, b) / (a_norm * b_norm);
    (1.0 - cos).clamp(0.0, 2.0)
}

/// `1 - (u·v)/(‖u‖‖v‖)`, clamped to `[0, 2]`.
pub fn cosine_distance(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, StoreError> {
    if u.dim() != v.dim() {
        return Err(StoreError::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let (nu, nv) = (norm64(u.as_slice()), norm64(v.as_slice()));
    if nu == 0.0 || nv == 0.0 {
        return Err(StoreError::ZeroVector);
    }
    Ok(distance_with_norms(u.as_slice(), nu, v.as_slice(), nv))
}
