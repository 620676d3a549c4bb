mod common;

use std::collections::HashSet;
use std::fs;

use provenance::interchange::EmbeddingVector;
use provenance::ledger::{
    classify_by_hash, embed_hash, verify_chain, ChainDefect, EmbedHash, HashVerdict, Ledger,
    LedgerError, ENTRY_LEN,
};
use sha2::{Digest, Sha256};

fn digest(i: u64) -> EmbedHash {
    EmbedHash(Sha256::digest(i.to_le_bytes()).into())
}

#[test]
fn membership_matches_reference_set() {
    let dir = tempfile::tempdir().unwrap();
    let mut l = Ledger::create(&dir.path().join("h.lgr"), "human").unwrap();
    let mut reference = HashSet::new();
    for i in 0..1000 {
        l.store_hash(digest(i)).unwrap();
        reference.insert(digest(i));
    }
    for i in 0..2000 {
        assert_eq!(l.hash_exists(&digest(i)), reference.contains(&digest(i)), "probe {i}");
    }
    assert!(l.verify().unwrap().ok);
}

#[test]
fn two_hundred_stores_gas_within_range() {
    let dir = tempfile::tempdir().unwrap();
    let mut l = Ledger::create(&dir.path().join("a.lgr"), "ai").unwrap();
    let gas: Vec<u64> = (0..200).map(|i| l.store_hash(digest(i)).unwrap().gas).collect();
    let mean = gas.iter().sum::<u64>() as f64 / 200.0;
    assert_eq!(l.len(), 200);
    assert!((21_528.0..=51_228.0).contains(&mean));
    assert!(verify_chain(l.path()).unwrap().ok);
}

#[test]
fn one_ulp_change_is_undetermined() {
    let dir = tempfile::tempdir().unwrap();
    let mut ai = Ledger::create(&dir.path().join("a.lgr"), "ai").unwrap();
    let human = Ledger::create(&dir.path().join("h.lgr"), "human").unwrap();
    let v = common::random_vectors(1, 768, 9).remove(0);
    ai.store_hash(embed_hash(&v).unwrap()).unwrap();
    assert_eq!(classify_by_hash(&embed_hash(&v).unwrap(), &ai, &human).verdict, HashVerdict::Ai);

    let mut bumped = v.as_slice().to_vec();
    bumped[100] = f32::from_bits(bumped[100].to_bits() + 1);
    let near = EmbeddingVector::new(bumped).unwrap();
    assert_eq!(
        classify_by_hash(&embed_hash(&near).unwrap(), &ai, &human).verdict,
        HashVerdict::Undetermined
    );
}

#[test]
fn digest_in_both_ledgers_reports_ai_with_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let mut ai = Ledger::create(&dir.path().join("a.lgr"), "ai").unwrap();
    let mut human = Ledger::create(&dir.path().join("h.lgr"), "human").unwrap();
    ai.store_hash(digest(1)).unwrap();
    human.store_hash(digest(1)).unwrap();
    let c = classify_by_hash(&digest(1), &ai, &human);
    assert_eq!(c.verdict, HashVerdict::Ai);
    assert!(c.conflict);
}

#[test]
fn no_collisions_over_ten_thousand_vectors() {
    let vs = common::random_vectors(10_000, 16, 77);
    let digests: HashSet<_> = vs.iter().map(|v| embed_hash(v).unwrap()).collect();
    assert_eq!(digests.len(), 10_000);
}

#[test]
fn appends_never_rewrite_earlier_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.lgr");
    let mut l = Ledger::create(&path, "ai").unwrap();
    let mut snapshots = vec![fs::read(&path).unwrap()];
    for i in 0..20 {
        l.store_hash_at(digest(i), i).unwrap();
        snapshots.push(fs::read(&path).unwrap());
    }
    let last = snapshots.last().unwrap();
    for s in &snapshots {
        assert_eq!(&last[..s.len()], &s[..]);
    }
}

#[test]
fn flipped_digest_byte_reports_that_entry() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.lgr");
    let mut l = Ledger::create(&path, "ai").unwrap();
    for i in 0..50 {
        l.store_hash_at(digest(i), i).unwrap();
    }
    drop(l);
    let mut bytes = fs::read(&path).unwrap();
    let header = bytes.len() - 50 * ENTRY_LEN;
    // entry 10, first digest byte (after the 8-byte index)
    bytes[header + 10 * ENTRY_LEN + 8] ^= 0x40;
    fs::write(&path, &bytes).unwrap();
    let s = verify_chain(&path).unwrap();
    assert!(!s.ok);
    assert_eq!(s.first_bad_index, Some(10));
    assert!(matches!(Ledger::open(&path), Err(LedgerError::Corrupt { .. })));
}

#[test]
fn truncation_mid_entry_is_structural() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.lgr");
    let mut l = Ledger::create(&path, "ai").unwrap();
    for i in 0..5 {
        l.store_hash_at(digest(i), i).unwrap();
    }
    drop(l);
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 40]).unwrap();
    let s = verify_chain(&path).unwrap();
    assert!(!s.ok);
    assert_eq!(s.first_bad_index, Some(4));
    assert!(matches!(s.defect, Some(ChainDefect::Truncated { .. })));
}
