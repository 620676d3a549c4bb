//! Append-only ledger file.
//!
//! ```text
//! header:  "LGR1" | version u16 LE | name_len u16 LE | name (UTF-8)
//! entry:   index u64 LE | digest [32] | prev_chain [32] | chain [32] | timestamp u64 LE
//! chain_i = SHA-256(prev_chain_i || digest_i || index_i LE || timestamp_i LE)
//! prev_chain_0 = 0^32, prev_chain_i = chain_{i-1}
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::gas::GasModel;
use super::{EmbedHash, LedgerError};

pub const LEDGER_MAGIC: [u8; 4] = *b"LGR1";
pub const LEDGER_VERSION: u16 = 1;
pub const ENTRY_LEN: usize = 8 + 32 + 32 + 32 + 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub index: u64,
    pub digest: EmbedHash,
    pub prev_chain: [u8; 32],
    pub chain: [u8; 32],
    pub timestamp: u64,
}

impl LedgerEntry {
    fn link(index: u64, digest: EmbedHash, prev_chain: [u8; 32], timestamp: u64) -> Self {
        Self {
            index,
            digest,
            prev_chain,
            chain: chain_value(&prev_chain, &digest, index, timestamp),
            timestamp,
        }
    }

    fn encode(&self) -> [u8; ENTRY_LEN] {
        let mut out = [0u8; ENTRY_LEN];
        out[0..8].copy_from_slice(&self.index.to_le_bytes());
        out[8..40].copy_from_slice(&self.digest.0);
        out[40..72].copy_from_slice(&self.prev_chain);
        out[72..104].copy_from_slice(&self.chain);
        out[104..112].copy_from_slice(&self.timestamp.to_le_bytes());
        out
    }

    fn decode(b: &[u8]) -> Self {
        Self {
            index: u64::from_le_bytes(b[0..8].try_into().unwrap()),
            digest: EmbedHash(b[8..40].try_into().unwrap()),
            prev_chain: b[40..72].try_into().unwrap(),
            chain: b[72..104].try_into().unwrap(),
            timestamp: u64::from_le_bytes(b[104..112].try_into().unwrap()),
        }
    }
}

fn chain_value(prev: &[u8; 32], digest: &EmbedHash, index: u64, timestamp: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(prev);
    h.update(digest.0);
    h.update(index.to_le_bytes());
    h.update(timestamp.to_le_bytes());
    h.finalize().into()
}

fn encode_header(name: &str) -> Result<Vec<u8>, LedgerError> {
    let len = u16::try_from(name.len())
        .map_err(|_| LedgerError::BadHeader("name longer than 65535 bytes".into()))?;
    let mut out = Vec::with_capacity(8 + name.len());
    out.extend_from_slice(&LEDGER_MAGIC);
    out.extend_from_slice(&LEDGER_VERSION.to_le_bytes());
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    Ok(out)
}

/// Returns `(name, header length)`.
fn decode_header(bytes: &[u8]) -> Result<(String, usize), LedgerError> {
    if bytes.len() < 8 {
        return Err(LedgerError::BadHeader(format!("{} bytes is too short", bytes.len())));
    }
    if bytes[..4] != LEDGER_MAGIC {
        return Err(LedgerError::BadHeader(format!("bad magic {:02x?}", &bytes[..4])));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != LEDGER_VERSION {
        return Err(LedgerError::BadHeader(format!("unsupported version {version}")));
    }
    let len = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let end = 8 + len;
    if bytes.len() < end {
        return Err(LedgerError::BadHeader("truncated name".into()));
    }
    let name = std::str::from_utf8(&bytes[8..end])
        .map_err(|e| LedgerError::BadHeader(format!("name is not UTF-8: {e}")))?;
    Ok((name.to_string(), end))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChainDefect {
    /// Stored index differs from the entry's position.
    IndexGap { expected: u64, found: u64 },
    /// `prev_chain` does not equal the previous entry's `chain`.
    BrokenLink,
    /// Stored `chain` differs from the recomputed value.
    ChainMismatch,
    /// The file ends inside an entry.
    Truncated { trailing_bytes: usize },
}

/// Outcome of a full chain recomputation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStatus {
    pub ok: bool,
    pub entries: u64,
    pub first_bad_index: Option<u64>,
    pub defect: Option<ChainDefect>,
}

impl ChainStatus {
    fn clean(entries: u64) -> Self {
        Self {
            ok: true,
            entries,
            first_bad_index: None,
            defect: None,
        }
    }

    fn bad(entries: u64, index: u64, defect: ChainDefect) -> Self {
        Self {
            ok: false,
            entries,
            first_bad_index: Some(index),
            defect: Some(defect),
        }
    }
}

impl fmt::Display for ChainStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.first_bad_index, self.defect) {
            (Some(i), Some(d)) => write!(f, "invalid at entry {i} ({d:?}) of {}", self.entries),
            _ => write!(f, "valid ({} entries)", self.entries),
        }
    }
}

/// Checks every link of an entry region. Stops at the first defect.
fn verify_entries(region: &[u8]) -> (Vec<LedgerEntry>, ChainStatus) {
    let complete = region.len() / ENTRY_LEN;
    let trailing = region.len() % ENTRY_LEN;
    let total = complete as u64 + u64::from(trailing > 0);
    let mut entries = Vec::with_capacity(complete);
    let mut prev = [0u8; 32];
    for (i, chunk) in region.chunks_exact(ENTRY_LEN).enumerate() {
        let i = i as u64;
        let e = LedgerEntry::decode(chunk);
        let defect = if e.index != i {
            Some(ChainDefect::IndexGap {
                expected: i,
                found: e.index,
            })
        } else if e.prev_chain != prev {
            Some(ChainDefect::BrokenLink)
        } else if e.chain != chain_value(&e.prev_chain, &e.digest, e.index, e.timestamp) {
            Some(ChainDefect::ChainMismatch)
        } else {
            None
        };
        if let Some(d) = defect {
            return (entries, ChainStatus::bad(total, i, d));
        }
        prev = e.chain;
        entries.push(e);
    }
    if trailing > 0 {
        let status = ChainStatus::bad(
            total,
            complete as u64,
            ChainDefect::Truncated {
                trailing_bytes: trailing,
            },
        );
        return (entries, status);
    }
    (entries, ChainStatus::clean(total))
}

/// Recomputes every chain value of the ledger file at `path`.
///
/// A malformed header is an error; any defect in the entry region is
/// reported through the returned status.
pub fn verify_chain(path: &Path) -> Result<ChainStatus, LedgerError> {
    let bytes = fs::read(path)?;
    let (_, header_len) = decode_header(&bytes)?;
    Ok(verify_entries(&bytes[header_len..]).1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreReceipt {
    pub stored: bool,
    pub gas: u64,
    /// Index of the new entry, or of nothing when the digest was present.
    pub index: Option<u64>,
}

/// An open ledger: the entry list, a membership index and an append handle.
#[derive(Debug)]
pub struct Ledger {
    path: PathBuf,
    name: String,
    entries: Vec<LedgerEntry>,
    members: HashSet<EmbedHash>,
    file: File,
    gas_model: GasModel,
    gas_rng: ChaCha8Rng,
}

impl Ledger {
    pub fn create(path: &Path, name: &str) -> Result<Self, LedgerError> {
        if path.exists() {
            return Err(LedgerError::AlreadyExists(path.display().to_string()));
        }
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let header = encode_header(name)?;
        let mut file = OpenOptions::new().create_new(true).append(true).open(path)?;
        file.write_all(&header)?;
        file.sync_all()?;
        Ok(Self::assemble(path, name.to_string(), Vec::new(), file))
    }

    /// Opens an existing ledger, refusing it if any link fails to verify.
    pub fn open(path: &Path) -> Result<Self, LedgerError> {
        let bytes = fs::read(path)?;
        let (name, header_len) = decode_header(&bytes)?;
        let (entries, status) = verify_entries(&bytes[header_len..]);
        if !status.ok {
            return Err(LedgerError::Corrupt {
                path: path.display().to_string(),
                status,
            });
        }
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Self::assemble(path, name, entries, file))
    }

    pub fn open_or_create(path: &Path, name: &str) -> Result<Self, LedgerError> {
        if path.exists() {
            Self::open(path)
        } else {
            Self::create(path, name)
        }
    }

    fn assemble(path: &Path, name: String, entries: Vec<LedgerEntry>, file: File) -> Self {
        let members = entries.iter().map(|e| e.digest).collect();
        Self {
            path: path.to_path_buf(),
            name,
            entries,
            members,
            file,
            gas_model: GasModel::default(),
            gas_rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// Replaces the gas model and reseeds the per-transaction gas draws.
    pub fn set_gas_model(&mut self, model: GasModel, seed: u64) -> Result<(), LedgerError> {
        model.validate()?;
        self.gas_model = model;
        self.gas_rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Chain value of the last entry, or zeros for an empty ledger.
    pub fn head(&self) -> [u8; 32] {
        self.entries.last().map_or([0u8; 32], |e| e.chain)
    }

    pub fn hash_exists(&self, h: &EmbedHash) -> bool {
        self.members.contains(h)
    }

    pub fn store_hash(&mut self, h: EmbedHash) -> Result<StoreReceipt, LedgerError> {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        self.store_hash_at(h, now)
    }

    /// Appends `h` with an explicit timestamp. A digest already present is a
    /// no-op charged at the membership-check cost.
    pub fn store_hash_at(&mut self, h: EmbedHash, timestamp: u64) -> Result<StoreReceipt, LedgerError> {
        if self.members.contains(&h) {
            return Ok(StoreReceipt {
                stored: false,
                gas: self.gas_model.exists_check_cost,
                index: None,
            });
        }
        let index = self.entries.len() as u64;
        let entry = LedgerEntry::link(index, h, self.head(), timestamp);
        self.file.write_all(&entry.encode())?;
        self.file.flush()?;
        self.entries.push(entry);
        self.members.insert(h);
        let gas = self.gas_model.draw_uint_store(&mut self.gas_rng);
        Ok(StoreReceipt {
            stored: true,
            gas,
            index: Some(index),
        })
    }

    pub fn sync(&self) -> Result<(), LedgerError> {
        self.file.sync_data()?;
        Ok(())
    }

    pub fn verify(&self) -> Result<ChainStatus, LedgerError> {
        verify_chain(&self.path)
    }
}
