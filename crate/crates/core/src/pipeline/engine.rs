use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use super::{ClassifyResponse, EngineConfig, EngineError, FrameworkMode, Prediction, CONFIG_FILE};
use crate::classifier::{self, Evaluation};
use crate::interchange::{read_embedding_file, EmbeddingVector, Label, Record};
use crate::ledger::{
    classify_by_hash, embed_hash, simulate_gas, verify_chain, ChainStatus, GasMode, GasRun,
    HashVerdict, Ledger,
};
use crate::perturb::derive_seed;
use crate::vecstore::{Collection, VectorStore};

pub const STORE_DIR: &str = "store";
pub const LEDGER_DIR: &str = "ledgers";
pub const AI_LEDGER_FILE: &str = "ai.lgr";
pub const HUMAN_LEDGER_FILE: &str = "human.lgr";

const GAS_STREAM: u64 = 0x0067_6173;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub records: usize,
    pub inserted: usize,
    pub replaced: usize,
    /// New ledger entries; re-registered digests are not counted.
    pub ledger_appended: usize,
    pub gas_total: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectionHealth {
    pub name: String,
    pub label: Label,
    pub dim: usize,
    pub generation: u64,
    pub records: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerHealth {
    pub name: String,
    pub entries: u64,
    pub chain: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_bad_index: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub mode: FrameworkMode,
    pub collections: Vec<CollectionHealth>,
    pub ledgers: Vec<LedgerHealth>,
}

impl Health {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// A data root: one AI and one human collection plus their two ledgers.
///
/// ```text
/// <root>/provenance.toml
/// <root>/store/<collection>/{manifest,<namespace>.emb}
/// <root>/ledgers/{ai,human}.lgr
/// ```
#[derive(Debug)]
pub struct Engine {
    root: PathBuf,
    config: EngineConfig,
    store: VectorStore,
    ai_ledger: RwLock<Ledger>,
    human_ledger: RwLock<Ledger>,
    ingest_gate: Mutex<()>,
}

impl Engine {
    /// Creates both collections with dimension `dim` and empty ledgers, and
    /// writes the config file if none exists.
    pub fn init(root: &Path, dim: usize, config: EngineConfig) -> Result<Self, EngineError> {
        fs::create_dir_all(root)?;
        let store = VectorStore::open(root.join(STORE_DIR))?;
        store.create_collection(&config.ai_collection, Label::Ai, dim)?;
        store.create_collection(&config.human_collection, Label::Human, dim)?;
        let ledgers = root.join(LEDGER_DIR);
        Ledger::create(&ledgers.join(AI_LEDGER_FILE), "ai")?;
        Ledger::create(&ledgers.join(HUMAN_LEDGER_FILE), "human")?;
        let config_path = root.join(CONFIG_FILE);
        if !config_path.exists() {
            fs::write(config_path, config.to_toml())?;
        }
        Self::open(root, config)
    }

    /// Opens an initialized root. Ledgers that fail verification are refused.
    pub fn open(root: &Path, config: EngineConfig) -> Result<Self, EngineError> {
        let store_dir = root.join(STORE_DIR);
        let ledgers = root.join(LEDGER_DIR);
        if !store_dir.is_dir() || !ledgers.join(AI_LEDGER_FILE).exists() {
            return Err(EngineError::Uninitialized(root.display().to_string()));
        }
        let store = VectorStore::open(store_dir)?;
        for (name, label) in [
            (&config.ai_collection, Label::Ai),
            (&config.human_collection, Label::Human),
        ] {
            let c = store
                .collection(name)
                .map_err(|_| EngineError::Uninitialized(root.display().to_string()))?;
            let found = c.read().label();
            if found != label {
                return Err(EngineError::InvalidInput(format!(
                    "collection {name:?} is labeled {found}, expected {label}"
                )));
            }
        }
        let mut ai_ledger = Ledger::open(&ledgers.join(AI_LEDGER_FILE))?;
        let mut human_ledger = Ledger::open(&ledgers.join(HUMAN_LEDGER_FILE))?;
        ai_ledger.set_gas_model(config.gas, derive_seed(config.seed, GAS_STREAM, 0))?;
        human_ledger.set_gas_model(config.gas, derive_seed(config.seed, GAS_STREAM, 1))?;
        Ok(Self {
            root: root.to_path_buf(),
            config,
            store,
            ai_ledger: RwLock::new(ai_ledger),
            human_ledger: RwLock::new(human_ledger),
            ingest_gate: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn store(&self) -> &VectorStore {
        &self.store
    }

    pub fn dim(&self) -> usize {
        self.collection_handle(Label::Ai).read().dim()
    }

    fn collection_name(&self, label: Label) -> &str {
        match label {
            Label::Ai => &self.config.ai_collection,
            Label::Human => &self.config.human_collection,
        }
    }

    fn collection_handle(&self, label: Label) -> Arc<RwLock<Collection>> {
        self.store
            .collection(self.collection_name(label))
            .expect("checked at open")
    }

    fn ledger(&self, label: Label) -> &RwLock<Ledger> {
        match label {
            Label::Ai => &self.ai_ledger,
            Label::Human => &self.human_ledger,
        }
    }

    /// Resolves a collection argument given either as a label (`ai`,
    /// `human`) or as a configured collection name.
    pub fn resolve_collection(&self, name: &str) -> Result<Label, EngineError> {
        if name == self.config.ai_collection {
            return Ok(Label::Ai);
        }
        if name == self.config.human_collection {
            return Ok(Label::Human);
        }
        name.parse::<Label>()
            .map_err(|_| EngineError::InvalidInput(format!("unknown collection {name:?}")))
    }

    /// Upserts `records` into the collection for `label` and, when the mode
    /// uses the ledgers, registers each embedding digest. Re-ingesting the
    /// same records appends nothing.
    pub fn ingest(
        &self,
        label: Label,
        namespace: &str,
        records: &[Record],
    ) -> Result<IngestSummary, EngineError> {
        let _gate = self.ingest_gate.lock();
        let records: Vec<Record> = records
            .iter()
            .map(|(meta, v)| {
                let mut meta = meta.clone();
                meta.namespace = namespace.to_string();
                (meta, v.clone())
            })
            .collect();
        let upserted = self
            .store
            .upsert_batch(self.collection_name(label), namespace, &records)?;
        let mut summary = IngestSummary {
            records: records.len(),
            inserted: upserted.inserted,
            replaced: upserted.replaced,
            ..IngestSummary::default()
        };
        if self.config.mode.uses_ledger() && !records.is_empty() {
            let mut ledger = self.ledger(label).write();
            for (_, v) in &records {
                let receipt = ledger.store_hash(embed_hash(v)?)?;
                summary.gas_total += receipt.gas;
                summary.ledger_appended += usize::from(receipt.stored);
            }
            ledger.sync()?;
        }
        Ok(summary)
    }

    pub fn ingest_file(
        &self,
        path: &Path,
        collection: &str,
        namespace: &str,
    ) -> Result<IngestSummary, EngineError> {
        let label = self.resolve_collection(collection)?;
        let records = read_embedding_file(path)?;
        self.ingest(label, namespace, &records)
    }

    /// Classifies one embedding using the configured mode.
    pub fn classify(&self, q: &EmbeddingVector) -> Result<ClassifyResponse, EngineError> {
        self.classify_with(q, self.config.mode)
    }

    pub fn classify_with(
        &self,
        q: &EmbeddingVector,
        mode: FrameworkMode,
    ) -> Result<ClassifyResponse, EngineError> {
        q.ensure_nonzero()?;
        let mut resp = ClassifyResponse {
            id: None,
            prediction: Prediction::Undetermined,
            human_similarity: None,
            ai_similarity: None,
            nearest_ai_id: None,
            nearest_human_id: None,
            verified: None,
            mode,
            conflict: false,
        };
        if mode.uses_vectors() {
            let ai = self.collection_handle(Label::Ai);
            let human = self.collection_handle(Label::Human);
            let (ai, human) = (ai.read(), human.read());
            let rec = classifier::classify(q, &ai, &human, &self.config.namespace)?;
            resp.prediction = match rec.predicted_label {
                Label::Ai => Prediction::Ai,
                Label::Human => Prediction::Human,
            };
            resp.human_similarity = Some(rec.human_similarity);
            resp.ai_similarity = Some(rec.ai_similarity);
            resp.nearest_ai_id = Some(rec.nearest_ai_id);
            resp.nearest_human_id = Some(rec.nearest_human_id);
        }
        if mode.uses_ledger() {
            let h = embed_hash(q)?;
            let hc = {
                let (ai, human) = (self.ai_ledger.read(), self.human_ledger.read());
                classify_by_hash(&h, &ai, &human)
            };
            resp.verified = Some(hc.verdict != HashVerdict::Undetermined);
            if mode == FrameworkMode::HashOnly {
                resp.prediction = match hc.verdict {
                    HashVerdict::Ai => Prediction::Ai,
                    HashVerdict::Human => Prediction::Human,
                    HashVerdict::Undetermined => Prediction::Undetermined,
                };
                resp.conflict = hc.conflict;
            } else {
                let disagrees = match hc.verdict {
                    HashVerdict::Ai => resp.prediction != Prediction::Ai,
                    HashVerdict::Human => resp.prediction != Prediction::Human,
                    HashVerdict::Undetermined => false,
                };
                if hc.conflict || disagrees {
                    log::warn!("ledger evidence for {h} disagrees with the vector verdict");
                }
                resp.conflict = hc.conflict || disagrees;
            }
        }
        Ok(resp)
    }

    /// Classifies every record, tagging each response with the record id.
    pub fn classify_records(
        &self,
        records: &[Record],
        mode: FrameworkMode,
    ) -> Result<Vec<ClassifyResponse>, EngineError> {
        records
            .iter()
            .map(|(meta, v)| {
                let mut r = self.classify_with(v, mode)?;
                r.id = Some(meta.id.clone());
                Ok(r)
            })
            .collect()
    }

    /// Labeled evaluation with AI as the positive class. When the mode uses
    /// the ledgers each record also carries its verification flag.
    pub fn evaluate(
        &self,
        test_ai: &[Record],
        test_human: &[Record],
    ) -> Result<Evaluation, EngineError> {
        let vectors = |rs: &[Record]| rs.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>();
        let mut eval = {
            let ai = self.collection_handle(Label::Ai);
            let human = self.collection_handle(Label::Human);
            let (ai, human) = (ai.read(), human.read());
            classifier::evaluate(
                &vectors(test_ai),
                &vectors(test_human),
                &ai,
                &human,
                &self.config.namespace,
            )?
        };
        let metas = test_ai.iter().chain(test_human).map(|(m, _)| m);
        let (ai_l, human_l) = (self.ai_ledger.read(), self.human_ledger.read());
        for ((rec, meta), (_, v)) in eval
            .records
            .iter_mut()
            .zip(metas)
            .zip(test_ai.iter().chain(test_human))
        {
            rec.source_name = meta.source_name.clone();
            if self.config.mode.uses_ledger() {
                let h = embed_hash(v)?;
                rec.verified_on_ledger = Some(ai_l.hash_exists(&h) || human_l.hash_exists(&h));
            }
        }
        Ok(eval)
    }

    /// Re-reads both ledger files from disk and recomputes every link.
    pub fn verify_ledgers(&self) -> Result<Vec<(String, ChainStatus)>, EngineError> {
        verify_ledger_files(&self.root)
    }

    pub fn health(&self) -> Result<Health, EngineError> {
        let collections = [Label::Ai, Label::Human]
            .into_iter()
            .map(|label| {
                let c = self.collection_handle(label);
                let c = c.read();
                CollectionHealth {
                    name: c.name().to_string(),
                    label,
                    dim: c.dim(),
                    generation: c.generation(),
                    records: c.total_len(),
                }
            })
            .collect();
        let ledgers: Vec<LedgerHealth> = self
            .verify_ledgers()?
            .into_iter()
            .map(|(name, s)| LedgerHealth {
                name,
                entries: s.entries,
                chain: if s.ok { "valid" } else { "invalid" }.to_string(),
                first_bad_index: s.first_bad_index,
            })
            .collect();
        let ok = ledgers.iter().all(|l| l.chain == "valid");
        Ok(Health {
            status: if ok { "ok" } else { "degraded" }.to_string(),
            mode: self.config.mode,
            collections,
            ledgers,
        })
    }
}

/// Verifies the two ledgers under `root` without opening the engine.
pub fn verify_ledger_files(root: &Path) -> Result<Vec<(String, ChainStatus)>, EngineError> {
    let dir = root.join(LEDGER_DIR);
    [("ai", AI_LEDGER_FILE), ("human", HUMAN_LEDGER_FILE)]
        .into_iter()
        .map(|(name, file)| Ok((name.to_string(), verify_chain(&dir.join(file))?)))
        .collect()
}

/// Simulated gas for `n` digest stores under the configured model.
pub fn cmd_gas(mode: GasMode, n: usize, config: &EngineConfig) -> Result<GasRun, EngineError> {
    Ok(simulate_gas(mode, n, &config.gas, config.seed)?)
}
