//! Hash-chain properties checked from the outside: the chain hash is
//! cross-validated against an independently written SHA-256, hashes are
//! collision-free over large random spec populations, every
//! single-character corruption of a committed spec is detected by replay,
//! and canonicalization is byte-idempotent through a parse round-trip.

use std::collections::HashSet;

use proptest::prelude::*;
use qcivet_core::auditchain::{
    canonicalize, chain_hash, AuditLog, ChainFault, ChainVerification, SpecValue, StageSpec,
    GENESIS_HEAD,
};
use qcivet_core::rng::SplitMix64;

/// A from-scratch FIPS 180-4 SHA-256, kept deliberately independent of the
/// `sha2` crate the library uses, so the two implementations check each
/// other.
mod fips {
    const K: [u32; 64] = [
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2,
    ];

    pub fn sha256_hex(message: &[u8]) -> String {
        let mut h: [u32; 8] = [
            0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab,
            0x5be0cd19,
        ];
        let bit_len = (message.len() as u64).wrapping_mul(8);
        let mut padded = message.to_vec();
        padded.push(0x80);
        while padded.len() % 64 != 56 {
            padded.push(0);
        }
        padded.extend_from_slice(&bit_len.to_be_bytes());

        for block in padded.chunks_exact(64) {
            let mut w = [0u32; 64];
            for (t, word) in block.chunks_exact(4).enumerate() {
                w[t] = u32::from_be_bytes(word.try_into().unwrap());
            }
            for t in 16..64 {
                let s0 = w[t - 15].rotate_right(7) ^ w[t - 15].rotate_right(18) ^ (w[t - 15] >> 3);
                let s1 = w[t - 2].rotate_right(17) ^ w[t - 2].rotate_right(19) ^ (w[t - 2] >> 10);
                w[t] = w[t - 16].wrapping_add(s0).wrapping_add(w[t - 7]).wrapping_add(s1);
            }
            let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
            for t in 0..64 {
                let big_s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
                let ch = (e & f) ^ (!e & g);
                let t1 =
                    hh.wrapping_add(big_s1).wrapping_add(ch).wrapping_add(K[t]).wrapping_add(w[t]);
                let big_s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
                let maj = (a & b) ^ (a & c) ^ (b & c);
                let t2 = big_s0.wrapping_add(maj);
                hh = g;
                g = f;
                f = e;
                e = d.wrapping_add(t1);
                d = c;
                c = b;
                b = a;
                a = t1.wrapping_add(t2);
            }
            for (slot, v) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
                *slot = slot.wrapping_add(v);
            }
        }
        h.iter().map(|word| format!("{word:08x}")).collect()
    }
}

#[test]
fn independent_sha256_reproduces_the_standard_test_vectors() {
    assert_eq!(
        fips::sha256_hex(b""),
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    );
    assert_eq!(
        fips::sha256_hex(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}

#[test]
fn chain_hash_matches_the_independent_oracle() {
    // First record: preimage is the 64 ASCII zeros of genesis followed by
    // the canonical spec bytes.
    let spec = StageSpec::new().with("stage", "calibration").with("shots", 4096i64);
    let canonical = canonicalize(&spec).unwrap();
    let mut preimage = GENESIS_HEAD.as_bytes().to_vec();
    preimage.extend_from_slice(&canonical);
    assert_eq!(chain_hash(GENESIS_HEAD, &spec).unwrap(), fips::sha256_hex(&preimage));

    // And the invariant is preserved link by link on a longer chain.
    let mut log = AuditLog::new();
    for i in 0..5i64 {
        let spec = StageSpec::new().with("i", i).with("x", 0.25 * i as f64);
        log.append(format!("s{i}"), spec).unwrap();
    }
    let mut prev = GENESIS_HEAD.to_string();
    for record in log.records() {
        let mut preimage = prev.as_bytes().to_vec();
        preimage.extend_from_slice(&canonicalize(&record.spec).unwrap());
        assert_eq!(record.hash, fips::sha256_hex(&preimage));
        prev = record.hash.clone();
    }
}

fn random_spec(rng: &mut SplitMix64, nonce: u64) -> StageSpec {
    let mut spec = StageSpec::new().with("nonce", nonce as i64);
    spec.insert("flag", rng.bernoulli(0.5));
    spec.insert("count", (rng.next_u64() % 10_000) as i64);
    spec.insert("level", rng.uniform(-5.0, 5.0));
    spec.insert("tag", format!("t{}", rng.next_u64() % 1000));
    spec
}

#[test]
fn one_hundred_thousand_distinct_specs_hash_without_collision() {
    let mut rng = SplitMix64::new(2026);
    let mut seen = HashSet::with_capacity(100_000);
    for nonce in 0..100_000u64 {
        let spec = random_spec(&mut rng, nonce);
        let hash = chain_hash(GENESIS_HEAD, &spec).unwrap();
        assert!(seen.insert(hash), "collision at nonce {nonce}");
    }
}

/// A six-stage chain whose specs exercise every value shape.
fn varied_base_log() -> AuditLog {
    let mut log = AuditLog::new();
    let specs = [
        StageSpec::new().with("name", "ingest").with("batch", 512i64).with("strict", true),
        StageSpec::new()
            .with("name", "transform")
            .with("scale", 0.375)
            .with("labels", vec![SpecValue::from("alpha"), SpecValue::from("beta")]),
        StageSpec::new().with("name", "prepare").with("comment", "line one\nline two\ttabbed"),
        StageSpec::new().with("name", "execute").with("shots", 4096i64).with("theta", 1.2566),
        StageSpec::new().with("name", "classify").with("threshold", 0.65),
        StageSpec::new().with("name", "report").with("format", "json").with("retries", 3i64),
    ];
    for (i, spec) in specs.into_iter().enumerate() {
        log.append(format!("stage_{i}"), spec).unwrap();
    }
    log
}

/// Corrupt one character of one record's canonical spec text, keeping only
/// corruptions that still parse as a well-formed spec and actually change
/// the canonical bytes. Returns the parsed corrupted spec.
fn corrupt_one_character(
    rng: &mut SplitMix64,
    original: &StageSpec,
) -> (StageSpec, usize, char, char) {
    let text = String::from_utf8(canonicalize(original).unwrap()).unwrap();
    let chars: Vec<char> = text.chars().collect();
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyz0123456789{}[]\":,.-_ ".chars().collect();
    loop {
        let pos = (rng.next_u64() as usize) % chars.len();
        let replacement = alphabet[(rng.next_u64() as usize) % alphabet.len()];
        if replacement == chars[pos] {
            continue;
        }
        let mut mutated: String = chars[..pos].iter().collect();
        mutated.push(replacement);
        mutated.extend(&chars[pos + 1..]);
        let Ok(parsed) = StageSpec::from_json(&mutated) else {
            continue;
        };
        if canonicalize(&parsed).unwrap() == text.as_bytes() {
            continue;
        }
        return (parsed, pos, chars[pos], replacement);
    }
}

#[test]
fn a_thousand_randomized_single_character_spec_mutations_are_all_detected() {
    let log = varied_base_log();
    let mut rng = SplitMix64::new(8088);
    for trial in 0..1000 {
        let target = (rng.next_u64() as usize) % log.len();
        let (corrupted, pos, was, now) =
            corrupt_one_character(&mut rng, &log.records()[target].spec);
        let mut records = log.records().to_vec();
        records[target].spec = corrupted;
        let attacked = AuditLog::from_records(records);
        match attacked.verify_full_chain() {
            ChainVerification::Failed { index, fault: ChainFault::RecomputedHashMismatch }
                if index == target => {}
            other => panic!(
                "trial {trial}: mutation {was:?}→{now:?} at char {pos} of record {target} \
                 was not pinpointed: {other:?}"
            ),
        }
    }
}

#[test]
fn exhaustive_single_character_mutations_of_stored_hashes_are_detected() {
    let log = varied_base_log();
    // Every hex character of every stored hash and linkage pointer, flipped
    // to a different hex digit, must break verification at that record.
    for target in 0..log.len() {
        let original = &log.records()[target];
        for pos in 0..64 {
            for replacement in ['0', '7', 'f'] {
                // Mutate the record's own stored hash.
                if original.hash.as_bytes()[pos] != replacement as u8 {
                    let mut records = log.records().to_vec();
                    records[target].hash.replace_range(pos..pos + 1, &replacement.to_string());
                    match AuditLog::from_records(records).verify_full_chain() {
                        ChainVerification::Failed {
                            index,
                            fault: ChainFault::RecomputedHashMismatch,
                        } if index == target => {}
                        other => panic!("hash flip at record {target} pos {pos}: {other:?}"),
                    }
                }
                // Mutate the record's linkage pointer.
                if original.prev_hash.as_bytes()[pos] != replacement as u8 {
                    let mut records = log.records().to_vec();
                    records[target].prev_hash.replace_range(pos..pos + 1, &replacement.to_string());
                    match AuditLog::from_records(records).verify_full_chain() {
                        ChainVerification::Failed { index, fault } if index == target => {
                            // Linkage is checked before the recomputed hash,
                            // and a changed prev also changes the recomputation,
                            // so the reported fault must be the linkage break.
                            assert_eq!(fault, ChainFault::LinkageBroken);
                        }
                        other => panic!("prev flip at record {target} pos {pos}: {other:?}"),
                    }
                }
            }
        }
    }
}

fn spec_value_strategy() -> impl Strategy<Value = SpecValue> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(SpecValue::from),
        any::<i64>().prop_map(SpecValue::from),
        any::<f64>().prop_filter("finite floats only", |f| f.is_finite()).prop_map(SpecValue::from),
        "[a-z0-9 \\\\\"\\n\\t\u{1}-\u{8}°π]{0,12}".prop_map(SpecValue::from),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(SpecValue::from),
            prop::collection::btree_map("[a-z°]{1,6}", inner, 0..4).prop_map(SpecValue::Map),
        ]
    })
}

fn spec_strategy() -> impl Strategy<Value = StageSpec> {
    prop::collection::btree_map("[a-z_]{1,8}", spec_value_strategy(), 0..5).prop_map(|map| {
        let mut spec = StageSpec::new();
        for (k, v) in map {
            spec.insert(k, v);
        }
        spec
    })
}

proptest! {
    /// canonical(parse(canonical(spec))) == canonical(spec), byte for byte,
    /// for arbitrary nested specs including control characters, unicode,
    /// and extreme floats.
    #[test]
    fn canonicalization_is_byte_idempotent_through_parse(spec in spec_strategy()) {
        let first = canonicalize(&spec).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        let reparsed = StageSpec::from_json(&text).unwrap();
        let second = canonicalize(&reparsed).unwrap();
        prop_assert_eq!(first, second);
    }

    /// Export → import returns an identical, verifying chain.
    #[test]
    fn export_import_round_trips_random_chains(
        specs in prop::collection::vec(spec_strategy(), 1..6)
    ) {
        let mut log = AuditLog::new();
        for (i, spec) in specs.into_iter().enumerate() {
            log.append(format!("stage_{i}"), spec).unwrap();
        }
        let text = log.export_jsonl().unwrap();
        let imported = AuditLog::import_jsonl(&text).unwrap();
        prop_assert!(imported.verify_full_chain().is_ok());
        prop_assert_eq!(imported.export_jsonl().unwrap(), text);
    }
}
