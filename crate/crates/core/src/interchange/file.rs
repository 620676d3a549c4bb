//! Binary embedding files.
//!
//! ```text
//! offset  size        field
//! 0       4           magic "EMB1"
//! 4       2           version (u16 LE) = 1
//! 6       4           dim (u32 LE)
//! 10      8           count (u64 LE)
//! 18      count*dim*4 payload, f32 LE, row-major
//! ```
//!
//! Metadata lives next to the payload in `<path>.meta`, one JSON object per
//! line in payload order.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{EmbeddingVector, InterchangeError, Record, RecordMeta};

pub const MAGIC: [u8; 4] = *b"EMB1";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 18;

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Writes `records` to `path` and its sidecar. The dimension is taken from
/// the first record; an empty sequence produces a dim-0, count-0 file.
pub fn write_embedding_file(records: &[Record], path: &Path) -> Result<(), InterchangeError> {
    let dim = records.first().map_or(0, |(_, v)| v.dim());
    write_embedding_file_with_dim(records, dim, path)
}

/// Like [`write_embedding_file`] but with an explicit dimension, so that an
/// empty file still records the dimension of the collection it belongs to.
pub fn write_embedding_file_with_dim(
    records: &[Record],
    dim: usize,
    path: &Path,
) -> Result<(), InterchangeError> {
    let mut ids = HashSet::with_capacity(records.len());
    for (meta, v) in records {
        meta.validate()?;
        if v.dim() != dim {
            return Err(InterchangeError::MixedDimensions {
                expected: dim,
                found: v.dim(),
                id: meta.id.clone(),
            });
        }
        if !ids.insert(meta.id.as_str()) {
            return Err(InterchangeError::DuplicateId(meta.id.clone()));
        }
    }
    let dim32 = u32::try_from(dim)
        .map_err(|_| InterchangeError::InvalidMeta(format!("dimension {dim} exceeds u32")))?;

    let mut payload = Vec::with_capacity(HEADER_LEN + records.len() * dim * 4);
    payload.extend_from_slice(&MAGIC);
    payload.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    payload.extend_from_slice(&dim32.to_le_bytes());
    payload.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for (_, v) in records {
        for c in v.as_slice() {
            payload.extend_from_slice(&c.to_le_bytes());
        }
    }

    let mut sidecar = Vec::new();
    for (meta, _) in records {
        serde_json::to_writer(&mut sidecar, meta).map_err(std::io::Error::from)?;
        sidecar.push(b'\n');
    }

    write_atomic(path, &payload)?;
    write_atomic(&sidecar_path(path), &sidecar)?;
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), InterchangeError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(bytes)?;
        w.flush()?;
        w.get_ref().sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads and validates an embedding file plus its sidecar.
pub fn read_embedding_file(path: &Path) -> Result<Vec<Record>, InterchangeError> {
    let bytes = fs::read(path)?;
    let (dim, count) = parse_header(&bytes)?;

    let expected = count
        .checked_mul(dim as u64)
        .and_then(|n| n.checked_mul(4))
        .ok_or(InterchangeError::Truncated {
            expected: u64::MAX,
            found: (bytes.len() - HEADER_LEN) as u64,
        })?;
    let found = (bytes.len() - HEADER_LEN) as u64;
    if found < expected {
        return Err(InterchangeError::Truncated { expected, found });
    }
    if found > expected {
        return Err(InterchangeError::TrailingBytes { expected, found });
    }
    if dim == 0 && count > 0 {
        return Err(InterchangeError::EmptyDimWithRecords(count));
    }

    let metas = read_sidecar(&sidecar_path(path))?;
    if metas.len() as u64 != count {
        return Err(InterchangeError::SidecarCountMismatch {
            expected: count,
            found: metas.len() as u64,
        });
    }

    let payload = &bytes[HEADER_LEN..];
    let row_bytes = dim * 4;
    let mut records = Vec::with_capacity(metas.len());
    for (row, meta) in metas.into_iter().enumerate() {
        meta.validate()?;
        let chunk = &payload[row * row_bytes..(row + 1) * row_bytes];
        let components = chunk
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        records.push((meta, EmbeddingVector::new(components)?));
    }
    Ok(records)
}

fn parse_header(bytes: &[u8]) -> Result<(usize, u64), InterchangeError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        let mut magic = [0u8; 4];
        let n = bytes.len().min(4);
        magic[..n].copy_from_slice(&bytes[..n]);
        return Err(InterchangeError::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(InterchangeError::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(InterchangeError::UnsupportedVersion(version));
    }
    let dim = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[10..18].try_into().unwrap());
    Ok((dim, count))
}

fn read_sidecar(path: &Path) -> Result<Vec<RecordMeta>, InterchangeError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut metas = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let meta = serde_json::from_str(&line).map_err(|source| InterchangeError::SidecarParse {
            line: i + 1,
            source,
        })?;
        metas.push(meta);
    }
    Ok(metas)
}
