//! Deterministic image perturbations and the nearest-match robustness
//! benchmark.
//!
//! Every randomized perturbation is a pure function of the image and a
//! 64-bit seed. Benchmarks derive per-image seeds from one master seed with
//! [`derive_seed`].

mod bench;
mod corpus;
mod ops;

use std::fmt;
use std::str::FromStr;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interchange::InterchangeError;
use crate::vecstore::StoreError;

pub use bench::{
    modified_id, run_robustness_benchmark, source_id, write_details, write_grid, BenchRow,
    BenchmarkOutcome, MatchResult, ID_SEPARATOR,
};
pub use corpus::synthetic_corpus;
pub use ops::{apply_blur, apply_multi_patch, apply_resize, apply_single_patch, blur_sigma};

pub const SINGLE_PATCH_SIZE: u32 = 128;
pub const MULTI_PATCH_SIZE: u32 = 64;
pub const MULTI_PATCH_COUNT: (u32, u32) = (3, 5);
pub const RESIZE_TARGET: u32 = 128;
pub const BLUR_LEVELS: [u8; 4] = [20, 40, 60, 80];

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("patch of {size} px does not fit a {width}x{height} image")]
    PatchTooLarge { size: u32, width: u32, height: u32 },
    #[error("invalid patch count range {0}..={1}")]
    BadCountRange(u32, u32),
    #[error("resize target must be at least 1")]
    ZeroTarget,
    #[error("blur intensity {0}% is outside 0..=100")]
    BadIntensity(u8),
    #[error("unknown perturbation {0:?}")]
    UnknownPerturbation(String),
    #[error("modified record {modified:?} names unknown source {source_id:?}")]
    UnknownSource { modified: String, source_id: String },
    #[error("no modified records to evaluate")]
    NoModifiedRecords,
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Interchange(#[from] InterchangeError),
    #[error("report: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One image modification. Randomized kinds take their seed at application.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Perturbation {
    Identity,
    SinglePatch { size: u32 },
    MultiPatch { min_count: u32, max_count: u32, size: u32 },
    Resize { target: u32 },
    Blur { percent: u8 },
}

impl Perturbation {
    /// The seven benchmark modifications in report order: one patch,
    /// 3-5 patches, resize, then blur at 20/40/60/80%.
    pub fn standard_grid() -> Vec<Perturbation> {
        let mut grid = vec![
            Perturbation::SinglePatch {
                size: SINGLE_PATCH_SIZE,
            },
            Perturbation::MultiPatch {
                min_count: MULTI_PATCH_COUNT.0,
                max_count: MULTI_PATCH_COUNT.1,
                size: MULTI_PATCH_SIZE,
            },
            Perturbation::Resize {
                target: RESIZE_TARGET,
            },
        ];
        grid.extend(BLUR_LEVELS.iter().map(|&percent| Perturbation::Blur { percent }));
        grid
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Perturbation::SinglePatch { .. } | Perturbation::MultiPatch { .. })
    }

    /// Short name used in report rows and modified-record ids.
    pub fn tag(&self) -> String {
        match *self {
            Perturbation::Identity => "identity".into(),
            Perturbation::SinglePatch { size } if size == SINGLE_PATCH_SIZE => "single_patch".into(),
            Perturbation::SinglePatch { size } => format!("single_patch{size}"),
            Perturbation::MultiPatch {
                min_count,
                max_count,
                size,
            } if (min_count, max_count) == MULTI_PATCH_COUNT && size == MULTI_PATCH_SIZE => {
                "multi_patch".into()
            }
            Perturbation::MultiPatch {
                min_count,
                max_count,
                size,
            } => format!("multi_patch{min_count}-{max_count}x{size}"),
            Perturbation::Resize { target } if target == RESIZE_TARGET => "resize".into(),
            Perturbation::Resize { target } => format!("resize{target}"),
            Perturbation::Blur { percent } => format!("blur{percent}"),
        }
    }

    pub fn apply(&self, img: &RgbImage, seed: u64) -> Result<RgbImage, PerturbError> {
        match *self {
            Perturbation::Identity => Ok(img.clone()),
            Perturbation::SinglePatch { size } => apply_single_patch(img, size, seed),
            Perturbation::MultiPatch {
                min_count,
                max_count,
                size,
            } => apply_multi_patch(img, (min_count, max_count), size, seed),
            Perturbation::Resize { target } => apply_resize(img, target),
            Perturbation::Blur { percent } => apply_blur(img, percent),
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for Perturbation {
    type Err = PerturbError;

    /// Parses the tags produced by [`Perturbation::tag`] for the standard
    /// parameters plus `blur<N>`, `resize<N>` and `single_patch<N>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || PerturbError::UnknownPerturbation(s.to_string());
        let num = |rest: &str| rest.parse::<u32>().map_err(|_| unknown());
        match s {
            "identity" => return Ok(Perturbation::Identity),
            "single_patch" => return Ok(Perturbation::SinglePatch { size: SINGLE_PATCH_SIZE }),
            "multi_patch" => {
                return Ok(Perturbation::MultiPatch {
                    min_count: MULTI_PATCH_COUNT.0,
                    max_count: MULTI_PATCH_COUNT.1,
                    size: MULTI_PATCH_SIZE,
                })
            }
            "resize" => return Ok(Perturbation::Resize { target: RESIZE_TARGET }),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("blur") {
            let percent = u8::try_from(num(rest)?).map_err(|_| unknown())?;
            if percent > 100 {
                return Err(PerturbError::BadIntensity(percent));
            }
            return Ok(Perturbation::Blur { percent });
        }
        if let Some(rest) = s.strip_prefix("resize") {
            return Ok(Perturbation::Resize { target: num(rest)? });
        }
        if let Some(rest) = s.strip_prefix("single_patch") {
            return Ok(Perturbation::SinglePatch { size: num(rest)? });
        }
        Err(unknown())
    }
}

/// Counter-based seed split: mixes the master seed with a stream and a
/// counter through the SplitMix64 finalizer.
pub fn derive_seed(master: u64, stream: u64, counter: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let a = mix(master.wrapping_add(GOLDEN));
    let b = mix(a ^ stream.wrapping_add(GOLDEN.wrapping_mul(2)));
    mix(b ^ counter.wrapping_add(GOLDEN.wrapping_mul(3)))
}
