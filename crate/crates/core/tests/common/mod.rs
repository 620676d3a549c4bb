#![allow(dead_code)]

use provenance::interchange::{EmbeddingVector, Label, Record, RecordMeta};
use provenance::pipeline::{Engine, EngineConfig, FrameworkMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingVector {
    EmbeddingVector::new((0..dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()).unwrap()
}

pub fn random_vectors(n: usize, dim: usize, seed: u64) -> Vec<EmbeddingVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_vector(&mut rng, dim)).collect()
}

pub fn records(prefix: &str, label: Label, namespace: &str, vectors: Vec<EmbeddingVector>) -> Vec<Record> {
    vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let id = format!("{prefix}{i:05}");
            (RecordMeta::new(id.clone(), format!("{id}.png"), label, namespace), v)
        })
        .collect()
}

/// Exhaustive cosine distance in f64 over unit-normalized copies; shares
/// no code with the engine's kernel.
pub fn oracle_distance(a: &[f32], b: &[f32]) -> f64 {
    let unit = |v: &[f32]| {
        let n = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
        v.iter().map(|&x| f64::from(x) / n).collect::<Vec<f64>>()
    };
    let (ua, ub) = (unit(a), unit(b));
    1.0 - ua.iter().zip(&ub).map(|(x, y)| x * y).sum::<f64>()
}

/// Exhaustive top-k with ties broken by id.
pub fn oracle_top_k(corpus: &[(String, Vec<f32>)], q: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = corpus
        .iter()
        .map(|(id, v)| (id.clone(), oracle_distance(v, q)))
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub const FIXTURE_DIM: usize = 32;

fn around(center: &[f32], rng: &mut ChaCha8Rng, spread: f32) -> EmbeddingVector {
    EmbeddingVector::new(
        center
            .iter()
            .map(|&c| c + spread * rng.sample::<f32, _>(StandardNormal))
            .collect(),
    )
    .unwrap()
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub engine: Engine,
    pub ai: Vec<Record>,
    pub human: Vec<Record>,
    /// Unseen vectors, half near each cluster.
    pub probes: Vec<EmbeddingVector>,
}

/// Seeded store with 20 AI and 20 human records in two overlapping clusters,
/// ingested with both ledgers populated.
pub fn fixture(seed: u64, n_probes: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ai_center: Vec<f32> = (0..FIXTURE_DIM).map(|_| rng.sample(StandardNormal)).collect();
    let human_center: Vec<f32> = (0..FIXTURE_DIM).map(|_| rng.sample(StandardNormal)).collect();
    let ai: Vec<EmbeddingVector> = (0..20).map(|_| around(&ai_center, &mut rng, 0.8)).collect();
    let human: Vec<EmbeddingVector> = (0..20).map(|_| around(&human_center, &mut rng, 0.8)).collect();
    let probes = (0..n_probes)
        .map(|i| {
            let c = if i % 2 == 0 { &ai_center } else { &human_center };
            around(c, &mut rng, 1.0)
        })
        .collect();

    let dir = tempfile::tempdir().unwrap();
    let config = EngineConfig {
        mode: FrameworkMode::Hybrid,
        seed,
        ..EngineConfig::default()
    };
    let engine = Engine::init(dir.path(), FIXTURE_DIM, config).unwrap();
    let ai = records("ai_", Label::Ai, "train", ai);
    let human = records("human_", Label::Human, "train", human);
    engine.ingest(Label::Ai, "train", &ai).unwrap();
    engine.ingest(Label::Human, "train", &human).unwrap();
    Fixture {
        dir,
        engine,
        ai,
        human,
        probes,
    }
}
