use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::derive_seed;

const FAMILY_SIZE: usize = 4;

struct Blob {
    cx: f64,
    cy: f64,
    radius: f64,
    color: [f64; 3],
}

/// Deterministic synthetic test images named `synth_0000`, `synth_0001`, ...
///
/// Images come in families of four that share a smooth background and blob
/// layout and differ only in a handful of small squares, so heavy blur or
/// occlusion can make siblings confusable.
pub fn synthetic_corpus(n: usize, size: u32, seed: u64) -> Vec<(String, RgbImage)> {
    let s = f64::from(size);
    let mut out = Vec::with_capacity(n);
    let mut family_base: Option<(Vec<Blob>, [f64; 3], [f64; 3])> = None;
    for i in 0..n {
        if i % FAMILY_SIZE == 0 || family_base.is_none() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, (i / FAMILY_SIZE) as u64));
            let blobs = (0..rng.random_range(3..=6))
                .map(|_| Blob {
                    cx: rng.random_range(0.0..s),
                    cy: rng.random_range(0.0..s),
                    radius: rng.random_range(0.08..0.3) * s,
                    color: std::array::from_fn(|_| rng.random_range(-120.0..160.0)),
                })
                .collect();
            let top = std::array::from_fn(|_| rng.random_range(20.0..200.0));
            let bottom = std::array::from_fn(|_| rng.random_range(20.0..200.0));
            family_base = Some((blobs, top, bottom));
        }
        let (blobs, top, bottom) = family_base.as_ref().expect("set above");

        let mut img = RgbImage::from_fn(size, size, |x, y| {
            let (fx, fy) = (f64::from(x), f64::from(y));
            let t = fy / s;
            let mut px: [f64; 3] = std::array::from_fn(|c| top[c] * (1.0 - t) + bottom[c] * t);
            for b in blobs {
                let d2 = (fx - b.cx).powi(2) + (fy - b.cy).powi(2);
                let k = (-d2 / (2.0 * b.radius * b.radius)).exp();
                for (v, &c) in px.iter_mut().zip(&b.color) {
                    *v += c * k;
                }
            }
            Rgb(px.map(|v| v.round().clamp(0.0, 255.0) as u8))
        });

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1, i as u64));
        let detail = (s / 32.0).max(1.0) as u32;
        for _ in 0..rng.random_range(4..=8) {
            let side = rng.random_range(detail..=detail * 3).min(size);
            let x0 = rng.random_range(0..=size - side);
            let y0 = rng.random_range(0..=size - side);
            let color = Rgb(std::array::from_fn(|_| rng.random_range(0..=255u8)));
            for y in y0..y0 + side {
                for x in x0..x0 + side {
                    img.put_pixel(x, y, color);
                }
            }
        }
        out.push((format!("synth_{i:04}"), img));
    }
    out
}
