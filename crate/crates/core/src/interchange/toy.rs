//! Model-free reference embedder: grayscale, area-averaged to a 16×16 grid,
//! flattened row-major and scaled to unit length.

use image::RgbImage;

use super::{EmbeddingVector, InterchangeError};

pub const TOY_GRID: usize = 16;
pub const TOY_DIM: usize = TOY_GRID * TOY_GRID;

pub fn toy_embed(img: &RgbImage) -> Result<EmbeddingVector, InterchangeError> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(InterchangeError::EmptyImage);
    }
    let gray: Vec<f64> = img
        .pixels()
        .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
        .collect();
    let grid = area_average(&gray, w, h, TOY_GRID, TOY_GRID);
    let norm = grid.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(InterchangeError::BlackImage);
    }
    EmbeddingVector::new(grid.iter().map(|g| (g / norm) as f32).collect())
}

/// Source pixel contributions for each destination pixel along one axis.
///
/// Source pixel `i` spans `[i*dst, (i+1)*dst)` and destination pixel `x`
/// spans `[x*src, (x+1)*src)` in a common integer unit, so the overlaps are
/// exact and each destination's weights sum to `src`.
fn axis_weights(src: usize, dst: usize) -> Vec<Vec<(usize, u64)>> {
    (0..dst)
        .map(|x| {
            let lo = x * src;
            let hi = (x + 1) * src;
            let first = lo / dst;
            let last = (hi - 1) / dst;
            (first..=last)
                .filter_map(|i| {
                    let s = (i * dst).max(lo);
                    let e = ((i + 1) * dst).min(hi);
                    (e > s).then_some((i, (e - s) as u64))
                })
                .collect()
        })
        .collect()
}

/// Area-averaging resample of a row-major `width × height` plane to
/// `target_w × target_h`. Same-size resampling is the identity.
pub fn area_average(
    plane: &[f64],
    width: usize,
    height: usize,
    target_w: usize,
    target_h: usize,
) -> Vec<f64> {
    assert_eq!(plane.len(), width * height, "plane size does not match dimensions");
    let xw = axis_weights(width, target_w);
    let yw = axis_weights(height, target_h);

    let mut horiz = vec![0.0; target_w * height];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for (x, weights) in xw.iter().enumerate() {
            let acc: f64 = weights.iter().map(|&(i, w)| row[i] * w as f64).sum();
            horiz[y * target_w + x] = acc / width as f64;
        }
    }

    let mut out = vec![0.0; target_w * target_h];
    for (y, weights) in yw.iter().enumerate() {
        for x in 0..target_w {
            let acc: f64 = weights
                .iter()
                .map(|&(j, w)| horiz[j * target_w + x] * w as f64)
                .sum();
            out[y * target_w + x] = acc / height as f64;
        }
    }
    out
}
