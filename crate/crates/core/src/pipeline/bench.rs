use std::collections::HashMap;
use std::fs;
use std::path::Path;

use image::RgbImage;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::EngineError;
use crate::interchange::{toy_embed, Label, Record, RecordMeta};
use crate::perturb::{
    derive_seed, modified_id, run_robustness_benchmark, BenchRow, MatchResult, Perturbation,
};
use crate::vecstore::Collection;

const ORIGINALS: &str = "originals";

/// What the benchmark embeds.
pub enum BenchInput {
    /// Raw images, perturbed here and embedded with the toy embedder.
    Images(Vec<(String, RgbImage)>),
    /// Precomputed embeddings. Modified ids are `<original id>@<tag>`.
    Embeddings {
        originals: Vec<Record>,
        modified: Vec<Record>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub matches: Vec<MatchResult>,
}

/// Reads every PNG/JPEG in `dir`, sorted by file name. The file name is the id.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, RgbImage)>, EngineError> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(EngineError::InvalidInput(format!(
            "no PNG or JPEG images in {}",
            dir.display()
        )));
    }
    paths
        .par_iter()
        .map(|p| {
            let id = p.file_name().expect("file").to_string_lossy().into_owned();
            Ok((id, image::open(p)?.to_rgb8()))
        })
        .collect()
}

/// Toy-embeds a set of images into records.
pub fn embed_images(
    images: &[(String, RgbImage)],
    label: Label,
    namespace: &str,
) -> Result<Vec<Record>, EngineError> {
    images
        .par_iter()
        .map(|(id, img)| {
            Ok((
                RecordMeta::new(id.clone(), id.clone(), label, namespace),
                toy_embed(img)?,
            ))
        })
        .collect()
}

/// Seed stream per perturbation, keyed by tag so a perturbation draws the
/// same patches whatever else is in the grid.
fn tag_stream(tag: &str) -> u64 {
    let d = Sha256::digest(tag.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Runs every perturbation and reports one grid row per perturbation, in
/// the given order.
pub fn cmd_bench(
    input: BenchInput,
    perturbations: &[Perturbation],
    seed: u64,
) -> Result<BenchReport, EngineError> {
    if perturbations.is_empty() {
        return Err(EngineError::InvalidInput("no perturbations selected".into()));
    }
    let (originals, mut variants) = match input {
        BenchInput::Images(images) => {
            if images.is_empty() {
                return Err(EngineError::InvalidInput("empty image corpus".into()));
            }
            let originals = embed_images(&images, Label::Ai, ORIGINALS)?;
            let mut variants = HashMap::new();
            for p in perturbations {
                let tag = p.tag();
                let stream = tag_stream(&tag);
                let recs = images
                    .par_iter()
                    .enumerate()
                    .map(|(i, (id, img))| {
                        let out = p.apply(img, derive_seed(seed, stream, i as u64))?;
                        Ok((
                            RecordMeta::new(modified_id(id, &tag), id.clone(), Label::Ai, &tag),
                            toy_embed(&out)?,
                        ))
                    })
                    .collect::<Result<Vec<Record>, EngineError>>()?;
                variants.insert(tag, recs);
            }
            (originals, variants)
        }
        BenchInput::Embeddings { originals, modified } => {
            let by_id: HashMap<&str, &Record> =
                modified.iter().map(|r| (r.0.id.as_str(), r)).collect();
            let mut variants = HashMap::new();
            for p in perturbations {
                let tag = p.tag();
                let recs = originals
                    .iter()
                    .map(|(meta, _)| {
                        let id = modified_id(&meta.id, &tag);
                        by_id
                            .get(id.as_str())
                            .map(|&r| r.clone())
                            .ok_or(EngineError::MissingEmbedding(id))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                variants.insert(tag, recs);
            }
            (originals, variants)
        }
    };

    let dim = originals
        .first()
        .map(|(_, v)| v.dim())
        .ok_or_else(|| EngineError::InvalidInput("no original embeddings".into()))?;
    // The benchmark collection is unlabeled in spirit; every record is
    // filed under one label so mixed-label inputs are accepted.
    let relabeled: Vec<Record> = originals
        .into_iter()
        .map(|(mut meta, v)| {
            meta.label = Label::Ai;
            (meta, v)
        })
        .collect();
    let mut collection = Collection::new(ORIGINALS, Label::Ai, dim)?;
    collection.upsert_batch(ORIGINALS, &relabeled)?;

    let mut rows = Vec::with_capacity(perturbations.len());
    let mut matches = Vec::new();
    for p in perturbations {
        let tag = p.tag();
        let modified = variants.remove(&tag).unwrap_or_default();
        let outcome = run_robustness_benchmark(&collection, ORIGINALS, &modified)?;
        rows.push(BenchRow::new(tag, &outcome));
        matches.extend(outcome.matches);
    }
    Ok(BenchReport { rows, matches })
}
