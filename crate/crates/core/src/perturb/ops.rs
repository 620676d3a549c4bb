use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PerturbError;
use crate::interchange::area_average;

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);

fn check_patch(img: &RgbImage, size: u32) -> Result<(), PerturbError> {
    if size == 0 || size > img.width().min(img.height()) {
        return Err(PerturbError::PatchTooLarge {
            size,
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(())
}

fn paint_random_patch(img: &mut RgbImage, size: u32, rng: &mut ChaCha8Rng) {
    let x0 = rng.random_range(0..=img.width() - size);
    let y0 = rng.random_range(0..=img.height() - size);
    for y in y0..y0 + size {
        for x in x0..x0 + size {
            img.put_pixel(x, y, WHITE);
        }
    }
}

/// One white `size × size` square at a uniformly random position fully
/// inside the image.
pub fn apply_single_patch(img: &RgbImage, size: u32, seed: u64) -> Result<RgbImage, PerturbError> {
    check_patch(img, size)?;
    let mut out = img.clone();
    paint_random_patch(&mut out, size, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok(out)
}

/// `k ~ U{lo..=hi}` white squares at independent positions; overlaps allowed.
pub fn apply_multi_patch(
    img: &RgbImage,
    (lo, hi): (u32, u32),
    size: u32,
    seed: u64,
) -> Result<RgbImage, PerturbError> {
    if lo == 0 || lo > hi {
        return Err(PerturbError::BadCountRange(lo, hi));
    }
    check_patch(img, size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(lo..=hi);
    let mut out = img.clone();
    for _ in 0..k {
        paint_random_patch(&mut out, size, &mut rng);
    }
    Ok(out)
}

fn planes(img: &RgbImage) -> [Vec<f32>; 3] {
    let n = (img.width() * img.height()) as usize;
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for p in img.pixels() {
        for (c, plane) in out.iter_mut().enumerate() {
            plane.push(f32::from(p[c]));
        }
    }
    out
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Area-averaging downsample (or box upsample) to `target × target`.
pub fn apply_resize(img: &RgbImage, target: u32) -> Result<RgbImage, PerturbError> {
    if target == 0 {
        return Err(PerturbError::ZeroTarget);
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let t = target as usize;
    let resized: Vec<Vec<f64>> = planes(img)
        .iter()
        .map(|p| {
            let p64: Vec<f64> = p.iter().map(|&v| f64::from(v)).collect();
            area_average(&p64, w, h, t, t)
        })
        .collect();
    Ok(RgbImage::from_fn(target, target, |x, y| {
        let i = y as usize * t + x as usize;
        Rgb([to_u8(resized[0][i]), to_u8(resized[1][i]), to_u8(resized[2][i])])
    }))
}

/// Gaussian sigma for a blur intensity: 10 px at 100% on a 512 px image,
/// linear in the intensity and in the shorter image side.
pub fn blur_sigma(percent: u8, width: u32, height: u32) -> f64 {
    f64::from(percent) / 100.0 * 10.0 * f64::from(width.min(height)) / 512.0
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil() as i64;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| (w / total) as f32).collect()
}

/// Separable Gaussian blur with edge clamping. `percent = 0` is the identity.
pub fn apply_blur(img: &RgbImage, percent: u8) -> Result<RgbImage, PerturbError> {
    if percent > 100 {
        return Err(PerturbError::BadIntensity(percent));
    }
    let sigma = blur_sigma(percent, img.width(), img.height());
    if sigma == 0.0 || img.width() == 0 || img.height() == 0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let radius = kernel.len() / 2;
    let (w, h) = (img.width() as usize, img.height() as usize);

    let blurred = planes(img).map(|plane| {
        // horizontal: pad each row with clamped edges, then one axpy per tap
        let mut horiz = vec![0.0f32; w * h];
        let mut padded = vec![0.0f32; w + 2 * radius];
        for y in 0..h {
            let row = &plane[y * w..(y + 1) * w];
            padded[..radius].fill(row[0]);
            padded[radius..radius + w].copy_from_slice(row);
            padded[radius + w..].fill(row[w - 1]);
            let out = &mut horiz[y * w..(y + 1) * w];
            for (k, &wk) in kernel.iter().enumerate() {
                for (o, &p) in out.iter_mut().zip(&padded[k..k + w]) {
                    *o += wk * p;
                }
            }
        }
        // vertical: accumulate whole clamped rows
        let mut vert = vec![0.0f32; w * h];
        for y in 0..h {
            let out = &mut vert[y * w..(y + 1) * w];
            for (k, &wk) in kernel.iter().enumerate() {
                let src = (y + k).saturating_sub(radius).min(h - 1);
                for (o, &p) in out.iter_mut().zip(&horiz[src * w..(src + 1) * w]) {
                    *o += wk * p;
                }
            }
        }
        vert
    });

    Ok(RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let i = y as usize * w + x as usize;
        Rgb(std::array::from_fn(|c| to_u8(f64::from(blurred[c][i]))))
    }))
}
