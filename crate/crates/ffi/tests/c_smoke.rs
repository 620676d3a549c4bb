//! Compiles `tests/c/smoke.c` against the generated header, links it with
//! the static library and runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

use provenance::interchange::{write_embedding_file, EmbeddingVector, Label, RecordMeta};

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn embedding_file(path: &Path, label: Label, rows: &[[f32; 2]]) {
    let recs: Vec<_> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let id = format!("{}{i}", label.as_str());
            (
                RecordMeta::new(id.clone(), id, label, "train"),
                EmbeddingVector::new(r.to_vec()).unwrap(),
            )
        })
        .collect();
    write_embedding_file(&recs, path).unwrap();
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libprovenance_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("run cc");
    assert!(status.success(), "C compile/link failed");

    let ai = dir.path().join("ai.emb");
    let human = dir.path().join("human.emb");
    embedding_file(&ai, Label::Ai, &[[1.0, 0.0], [0.9, 0.3]]);
    embedding_file(&human, Label::Human, &[[0.0, 1.0], [0.2, 0.9]]);

    let out = Command::new(&exe)
        .arg(dir.path().join("root"))
        .arg(&ai)
        .arg(&human)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "smoke failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "c smoke ok");
}
