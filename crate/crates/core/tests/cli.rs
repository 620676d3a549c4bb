mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use provenance::interchange::{write_embedding_file, write_embedding_file_with_dim, Label, Record};
use provenance::pipeline::{ClassifyResponse, Engine, EngineConfig, FrameworkMode, Prediction};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_provenance"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn provenance")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = run(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(recs: &[Record], path: &Path) {
    write_embedding_file(recs, path).unwrap();
}

#[test]
fn ingest_classify_and_reingest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["init", "--root", "r", "--dim", "16"], d);
    let ai = common::records("ai", Label::Ai, "train", common::random_vectors(7000, 16, 1));
    let human = common::records("hu", Label::Human, "train", common::random_vectors(7000, 16, 2));
    write(&ai, &d.join("ai.emb"));
    write(&human, &d.join("human.emb"));

    let first: serde_json::Value =
        serde_json::from_str(&ok(&["ingest", "--root", "r", "--file", "ai.emb", "--collection", "ai"], d)).unwrap();
    assert_eq!(first["inserted"], 7000);
    assert_eq!(first["ledger_appended"], 7000);
    ok(&["ingest", "--root", "r", "--file", "human.emb", "--collection", "human"], d);

    let manifest = |name: &str| fs::read_to_string(d.join("r/store").join(name).join("manifest")).unwrap();
    let ledger_bytes = || fs::read(d.join("r/ledgers/ai.lgr")).unwrap();
    let (m_before, l_before) = (manifest("ai"), ledger_bytes());

    let again: serde_json::Value =
        serde_json::from_str(&ok(&["ingest", "--root", "r", "--file", "ai.emb", "--collection", "ai"], d)).unwrap();
    assert_eq!(again["replaced"], 7000);
    assert_eq!(again["ledger_appended"], 0);
    assert_eq!(l_before, ledger_bytes());
    let count = |m: &str| serde_json::from_str::<serde_json::Value>(m).unwrap()["namespaces"].clone();
    assert_eq!(count(&m_before), count(&manifest("ai")));

    let engine = Engine::open(&d.join("r"), EngineConfig::default()).unwrap();
    assert_eq!(engine.store().collection("ai").unwrap().read().len("train"), 7000);
    assert_eq!(engine.store().collection("human").unwrap().read().len("train"), 7000);
    let health = engine.health().unwrap();
    assert_eq!(health.ledgers[0].entries, 7000);
    assert_eq!(health.ledgers[1].entries, 7000);

    // CLI answers equal in-process answers.
    let probe = &ai[123].1;
    let csv: Vec<String> = probe.as_slice().iter().map(|x| x.to_string()).collect();
    let line = ok(&["classify", "--root", "r", "--vector", &csv.join(",")], d);
    let mut from_cli: ClassifyResponse = serde_json::from_str(line.trim()).unwrap();
    from_cli.id = None;
    assert_eq!(from_cli, engine.classify(probe).unwrap());
    assert_eq!(from_cli.prediction, Prediction::Ai);
    assert_eq!(from_cli.verified, Some(true));

    let hash_only = ok(&["classify", "--root", "r", "--mode", "hash_only", "--vector", &csv.join(",")], d);
    let r: ClassifyResponse = serde_json::from_str(hash_only.trim()).unwrap();
    assert_eq!((r.prediction, r.mode), (Prediction::Ai, FrameworkMode::HashOnly));
    assert!(r.ai_similarity.is_none());
}

#[test]
fn empty_file_ingest_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["init", "--root", "r", "--dim", "4"], d);
    write_embedding_file_with_dim(&[], 4, &d.join("empty.emb")).unwrap();
    let before = fs::read_to_string(d.join("r/store/ai/manifest")).unwrap();
    let out: serde_json::Value =
        serde_json::from_str(&ok(&["ingest", "--root", "r", "--file", "empty.emb", "--collection", "ai"], d)).unwrap();
    assert_eq!(out["records"], 0);
    assert_eq!(before, fs::read_to_string(d.join("r/store/ai/manifest")).unwrap());
}

#[test]
fn report_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = common::fixture(3, 10);
    let root = fx.dir.path().to_str().unwrap().to_string();
    let test_ai = common::records("t_ai", Label::Ai, "test", fx.probes.iter().step_by(2).cloned().collect());
    let test_hu = common::records("t_hu", Label::Human, "test", fx.probes.iter().skip(1).step_by(2).cloned().collect());
    write(&test_ai, &d.join("tai.emb"));
    write(&test_hu, &d.join("thu.emb"));
    drop(fx.engine);

    ok(&["classify", "--root", &root, "--file", "tai.emb", "--report", "pred.csv"], d);
    let report = fs::read_to_string(d.join("pred.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next(),
        Some("filename,true_label,human_similarity,ai_similarity,predicted_label,verified")
    );
    assert_eq!(lines.count(), 5);

    let out = ok(
        &["evaluate", "--root", &root, "--ai-file", "tai.emb", "--human-file", "thu.emb", "--report", "eval.csv"],
        d,
    );
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let m = &v["confusion_matrix"];
    let total = ["tp", "fp", "tn", "fn"].iter().map(|k| m[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(total, 10);
    assert!(v["metrics"]["accuracy"].is_number());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(&["frobnicate"], d).status.code(), Some(1));
    assert_eq!(run(&["gas", "--n", "many"], d).status.code(), Some(1));
    // uninitialized root
    assert_eq!(run(&["classify", "--root", "nope", "--vector", "1,0"], d).status.code(), Some(2));

    ok(&["init", "--root", "r", "--dim", "2"], d);
    // empty store
    assert_eq!(run(&["classify", "--root", "r", "--vector", "1,0"], d).status.code(), Some(2));
    // zero vector
    assert_eq!(run(&["classify", "--root", "r", "--vector", "0,0"], d).status.code(), Some(2));
    // dimension mismatch on ingest
    let wrong = common::records("w", Label::Ai, "train", common::random_vectors(3, 5, 1));
    write(&wrong, &d.join("w.emb"));
    assert_eq!(
        run(&["ingest", "--root", "r", "--file", "w.emb", "--collection", "ai"], d).status.code(),
        Some(2)
    );

    let recs = common::records("a", Label::Ai, "train", common::random_vectors(5, 2, 1));
    write(&recs, &d.join("a.emb"));
    ok(&["ingest", "--root", "r", "--file", "a.emb", "--collection", "ai"], d);
    assert!(ok(&["ledger-verify", "--root", "r"], d).contains("valid (5 entries)"));

    let path = d.join("r/ledgers/ai.lgr");
    let mut bytes = fs::read(&path).unwrap();
    let last = bytes.len() - 20;
    bytes[last] ^= 1;
    fs::write(&path, bytes).unwrap();
    let out = run(&["ledger-verify", "--root", "r"], d);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("invalid at entry 4"));
    // the engine refuses to open a corrupt ledger
    assert_eq!(run(&["classify", "--root", "r", "--vector", "1,0"], d).status.code(), Some(3));
}

#[test]
fn gas_table() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(&["gas", "--mode", "uint256", "--n", "9000", "--seed", "4"], dir.path());
    let b = ok(&["gas", "--mode", "uint256", "--n", "9000", "--seed", "4"], dir.path());
    assert_eq!(a, b);
    let rows: Vec<&str> = a.lines().collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], "statistic,gas_uint256");
    assert_eq!(rows[1], "count,9000");
    let s = ok(&["gas", "--mode", "string", "--n", "200"], dir.path());
    assert_eq!(
        s,
        "statistic,gas_string\ncount,200\nmean,97667.00\nmedian,97667.00\nmin,97667\nmax,97667\n"
    );
}

#[test]
fn bench_from_image_directory() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = d.join("corpus");
    fs::create_dir(&corpus).unwrap();
    for (id, img) in provenance::perturb::synthetic_corpus(10, 128, 9) {
        img.save(corpus.join(format!("{id}.png"))).unwrap();
    }
    ok(
        &["bench", "--corpus", "corpus", "--include-identity", "--out", "grid.csv", "--details", "det.csv"],
        d,
    );
    let grid = fs::read_to_string(d.join("grid.csv")).unwrap();
    let tags: Vec<&str> = grid.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        tags,
        ["identity", "single_patch", "multi_patch", "resize", "blur20", "blur40", "blur60", "blur80"]
    );
    assert!(grid.lines().nth(1).unwrap().ends_with(",10,10,100.00"));
    let details = fs::read_to_string(d.join("det.csv")).unwrap();
    assert_eq!(details.lines().count(), 1 + 80);
    assert!(details.starts_with("modified_id,nearest_original_id,distance,correct\n"));

    ok(&["bench", "--corpus", "corpus", "--perturbations", "identity", "--out", "id.csv"], d);
    assert_eq!(
        fs::read_to_string(d.join("id.csv")).unwrap(),
        "perturbation,total,correct,accuracy_percent\nidentity,10,10,100.00\n"
    );
}

#[test]
fn bench_with_external_embeddings_requires_every_variant() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let originals = common::records("o", Label::Human, "orig", common::random_vectors(4, 8, 1));
    let modified: Vec<Record> = originals
        .iter()
        .take(3)
        .map(|(m, v)| {
            let mut meta = m.clone();
            meta.id = format!("{}@blur20", m.id);
            (meta, v.clone())
        })
        .collect();
    write(&originals, &d.join("o.emb"));
    write(&modified, &d.join("m.emb"));
    let out = run(
        &["bench", "--originals", "o.emb", "--modified", "m.emb", "--perturbations", "blur20"],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("o00003@blur20"));
}
