//! On-disk layout:
//!
//! ```text
//! <root>/<collection>/manifest          JSON: name, label, dim, namespaces, generation
//! <root>/<collection>/<namespace>.emb   interchange file (+ .emb.meta sidecar)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::{validate_name, Collection, StoreError};
use crate::interchange::{
    read_embedding_file, write_embedding_file_with_dim, EmbeddingVector, Label, Record, RecordMeta,
};

pub const MANIFEST_FILE: &str = "manifest";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionInfo {
    pub name: String,
    pub label: Label,
    pub dim: usize,
    pub namespaces: Vec<String>,
    pub generation: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UpsertSummary {
    pub inserted: usize,
    pub replaced: usize,
}

impl UpsertSummary {
    pub fn total(&self) -> usize {
        self.inserted + self.replaced
    }
}

/// Persistent set of collections. Each collection sits behind its own
/// reader-writer lock: queries share it, upserts hold it exclusively until
/// the batch is applied and flushed.
#[derive(Debug)]
pub struct VectorStore {
    root: PathBuf,
    collections: RwLock<BTreeMap<String, Arc<RwLock<Collection>>>>,
}

impl VectorStore {
    /// Opens (creating if needed) a store rooted at `root` and loads every
    /// collection found there.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let mut collections = BTreeMap::new();
        for entry in fs::read_dir(&root)? {
            let entry = entry?;
            if !entry.file_type()?.is_dir() || !entry.path().join(MANIFEST_FILE).exists() {
                continue;
            }
            let c = load_collection(&entry.path())?;
            collections.insert(c.name().to_string(), Arc::new(RwLock::new(c)));
        }
        Ok(Self {
            root,
            collections: RwLock::new(collections),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn create_collection(
        &self,
        name: &str,
        label: Label,
        dim: usize,
    ) -> Result<Arc<RwLock<Collection>>, StoreError> {
        let mut map = self.collections.write();
        if map.contains_key(name) {
            return Err(StoreError::DuplicateCollection(name.to_string()));
        }
        let c = Collection::new(name, label, dim)?;
        let dir = self.root.join(name);
        if dir.join(MANIFEST_FILE).exists() {
            return Err(StoreError::DuplicateCollection(name.to_string()));
        }
        fs::create_dir_all(&dir)?;
        write_manifest(&dir, &c)?;
        let handle = Arc::new(RwLock::new(c));
        map.insert(name.to_string(), Arc::clone(&handle));
        Ok(handle)
    }

    pub fn collection(&self, name: &str) -> Result<Arc<RwLock<Collection>>, StoreError> {
        self.collections
            .read()
            .get(name)
            .cloned()
            .ok_or_else(|| StoreError::UnknownCollection(name.to_string()))
    }

    pub fn list(&self) -> Vec<CollectionInfo> {
        self.collections
            .read()
            .values()
            .map(|c| info(&c.read()))
            .collect()
    }

    /// Upserts one record and persists its namespace.
    pub fn upsert(
        &self,
        collection: &str,
        namespace: &str,
        meta: &RecordMeta,
        v: &EmbeddingVector,
    ) -> Result<bool, StoreError> {
        let summary = self.upsert_batch(collection, namespace, &[(meta.clone(), v.clone())])?;
        Ok(summary.replaced == 1)
    }

    /// Applies a batch under the collection's write lock, then persists the
    /// touched namespace and the manifest. Readers never see a partial batch.
    pub fn upsert_batch(
        &self,
        collection: &str,
        namespace: &str,
        records: &[Record],
    ) -> Result<UpsertSummary, StoreError> {
        validate_name(namespace)?;
        let handle = self.collection(collection)?;
        let mut c = handle.write();
        if records.is_empty() {
            return Ok(UpsertSummary::default());
        }
        let mut staged = c.clone();
        let summary = staged.upsert_batch(namespace, records)?;
        let dir = self.root.join(collection);
        write_namespace(&dir, &staged, namespace)?;
        write_manifest(&dir, &staged)?;
        *c = staged;
        Ok(summary)
    }
}

fn info(c: &Collection) -> CollectionInfo {
    CollectionInfo {
        name: c.name().to_string(),
        label: c.label(),
        dim: c.dim(),
        namespaces: c.namespaces().map(str::to_string).collect(),
        generation: c.generation(),
    }
}

fn namespace_path(dir: &Path, namespace: &str) -> PathBuf {
    dir.join(format!("{namespace}.emb"))
}

fn write_manifest(dir: &Path, c: &Collection) -> Result<(), StoreError> {
    let text = serde_json::to_string_pretty(&info(c)).map_err(std::io::Error::from)?;
    let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
    Ok(())
}

fn write_namespace(dir: &Path, c: &Collection, namespace: &str) -> Result<(), StoreError> {
    let records = c.records(namespace);
    write_embedding_file_with_dim(&records, c.dim(), &namespace_path(dir, namespace))?;
    Ok(())
}

fn load_collection(dir: &Path) -> Result<Collection, StoreError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let corrupt = |reason: String| StoreError::CorruptManifest {
        path: manifest_path.display().to_string(),
        reason,
    };
    let text = fs::read_to_string(&manifest_path)?;
    let info: CollectionInfo = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;

    let mut c = Collection::new(info.name.clone(), info.label, info.dim)?;
    for ns in &info.namespaces {
        validate_name(ns)?;
        let records = read_embedding_file(&namespace_path(dir, ns))?;
        if let Some((_, v)) = records.first() {
            if v.dim() != info.dim {
                return Err(corrupt(format!(
                    "namespace {ns:?} has dim {} but manifest says {}",
                    v.dim(),
                    info.dim
                )));
            }
        }
        c.upsert_batch(ns, &records)?;
        // upsert_batch skips empty batches; keep the namespace visible anyway
        c.namespaces.entry(ns.clone()).or_default();
    }
    c.generation = info.generation;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[f32]) -> EmbeddingVector {
        EmbeddingVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn create_reopen_empty() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = VectorStore::open(dir.path()).unwrap();
            store.create_collection("ai", Label::Ai, 768).unwrap();
        }
        let store = VectorStore::open(dir.path()).unwrap();
        let c = store.collection("ai").unwrap();
        let c = c.read();
        assert_eq!(c.dim(), 768);
        assert_eq!(c.total_len(), 0);
    }

    #[test]
    fn duplicate_name_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = VectorStore::open(dir.path()).unwrap();
        store.create_collection("ai", Label::Ai, 4).unwrap();
        assert!(matches!(
            store.create_collection("ai", Label::Ai, 4),
            Err(StoreError::DuplicateCollection(_))
        ));
    }

    #[test]
    fn list_reports_both_labels_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = VectorStore::open(dir.path()).unwrap();
            store.create_collection("ai", Label::Ai, 4).unwrap();
            store.create_collection("human", Label::Human, 4).unwrap();
        }
        // enumerate the persisted manifests directly
        let mut seen: Vec<(String, Label)> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| {
                let text = fs::read_to_string(e.unwrap().path().join(MANIFEST_FILE)).unwrap();
                let info: CollectionInfo = serde_json::from_str(&text).unwrap();
                (info.name, info.label)
            })
            .collect();
        seen.sort();
        assert_eq!(
            seen,
            [("ai".to_string(), Label::Ai), ("human".to_string(), Label::Human)]
        );
        let store = VectorStore::open(dir.path()).unwrap();
        let listed: Vec<_> = store.list().into_iter().map(|i| (i.name, i.label)).collect();
        assert_eq!(listed, seen);
    }

    #[test]
    fn upsert_persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = VectorStore::open(dir.path()).unwrap();
            store.create_collection("ai", Label::Ai, 2).unwrap();
            let m = RecordMeta::new("a", "a.png", Label::Ai, "train");
            store.upsert("ai", "train", &m, &ev(&[1.0, 0.5])).unwrap();
            assert!(store.upsert("ai", "train", &m, &ev(&[0.5, 1.0])).unwrap());
        }
        let store = VectorStore::open(dir.path()).unwrap();
        let c = store.collection("ai").unwrap();
        let c = c.read();
        assert_eq!(c.get("train", "a").unwrap(), ev(&[0.5, 1.0]));
        assert_eq!(c.generation(), 2);
    }

    #[test]
    fn unknown_collection() {
        let dir = tempfile::tempdir().unwrap();
        let store = VectorStore::open(dir.path()).unwrap();
        assert!(matches!(
            store.collection("nope"),
            Err(StoreError::UnknownCollection(_))
        ));
    }

    #[test]
    fn failed_batch_leaves_disk_and_memory_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let store = VectorStore::open(dir.path()).unwrap();
        store.create_collection("ai", Label::Ai, 2).unwrap();
        let bad = vec![
            (RecordMeta::new("a", "a", Label::Ai, "train"), ev(&[1.0, 0.0])),
            (RecordMeta::new("b", "b", Label::Ai, "train"), ev(&[1.0])),
        ];
        assert!(store.upsert_batch("ai", "train", &bad).is_err());
        assert_eq!(store.collection("ai").unwrap().read().total_len(), 0);
        assert!(!dir.path().join("ai/train.emb").exists());
    }
}
