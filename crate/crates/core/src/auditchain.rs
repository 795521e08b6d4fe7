//! Canonical spec serialization and the hash-chained audit trail.
//!
//! Every pipeline stage commits a spec record σ; the trail stores
//! `hᵢ = SHA-256(hᵢ₋₁ ∥ canonical(σᵢ))` with `h₀` the 64-character zero
//! string, the previous head concatenated as its ASCII hex characters (not
//! raw bytes) so the preimage format is self-describing. Replaying the
//! chain detects any in-place edit; the [`scenario`] constructors build the
//! honest chain and the three canonical attacks against it for testing the
//! verifier.
//!
//! Canonical form: JSON with keys byte-sorted at every nesting level, no
//! whitespace, no nulls, integers in plain decimal, decimals in shortest
//! round-trip form without exponents (integral floats print as integers,
//! −0 as 0), and minimal string escaping (`\" \\ \b \t \n \f \r`, other
//! control characters as lowercase `\u00xx`). Serialization is hand-rolled
//! because general-purpose JSON writers do not guarantee this exact byte
//! form; parsing of *incoming* JSON uses serde_json and then re-canonicalizes.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// The fixed all-zeros genesis head h₀.
pub const GENESIS_HEAD: &str = "0000000000000000000000000000000000000000000000000000000000000000";

/// Mid-chain index mutated by the tamper scenario.
pub const TAMPER_INDEX: usize = 3;
/// Mid-chain position where the inject scenario splices its forged record.
pub const INJECT_INDEX: usize = 3;
/// Mid-chain index removed by the skip scenario.
pub const SKIP_INDEX: usize = 2;

/// Errors from canonicalization, parsing, import, and scenario setup.
#[derive(Debug, Error)]
pub enum ChainError {
    /// Canonical form has no representation for NaN or infinities.
    #[error("non-finite number {0} cannot be canonicalized")]
    NonFiniteNumber(f64),
    /// Incoming integers above i64::MAX are rejected rather than silently
    /// converted to lossy floats.
    #[error("integer {0} exceeds the signed 64-bit range")]
    IntegerOutOfRange(u64),
    /// The canonical format has no null.
    #[error("null values are not part of the canonical format")]
    NullValue,
    /// Incoming text is not valid JSON.
    #[error("malformed JSON: {0}")]
    Parse(String),
    /// Incoming top-level value is not an object.
    #[error("expected a JSON object at the top level")]
    NotAnObject,
    /// An imported record line is missing a required field.
    #[error("imported record missing field {0:?}")]
    MissingField(&'static str),
    /// An imported record field has the wrong type.
    #[error("imported field {0:?} has the wrong type")]
    BadFieldType(&'static str),
    /// An imported record line carries a field outside the format.
    #[error("imported record has unexpected field {0:?}")]
    UnexpectedField(String),
    /// Imported logs are re-verified on load; this one fails.
    #[error("imported log fails verification at index {index}: {fault}")]
    ImportVerification { index: usize, fault: ChainFault },
    /// Scenario construction needs enough stages for the mid-chain attacks.
    #[error("scenario base needs at least {need} stages, got {got}")]
    ScenarioBaseTooShort { need: usize, got: usize },
}

/// A JSON-serialisable value: string, integer, decimal, boolean, array, or
/// nested map. There is deliberately no null variant.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecValue {
    /// Boolean literal.
    Bool(bool),
    /// Signed 64-bit integer, canonicalized without exponent.
    Int(i64),
    /// Finite decimal, canonicalized in shortest round-trip form.
    Float(f64),
    /// UTF-8 string, canonicalized with minimal escaping.
    Str(String),
    /// Ordered list of values.
    Array(Vec<SpecValue>),
    /// Nested map; keys sort in byte order.
    Map(BTreeMap<String, SpecValue>),
}

impl From<bool> for SpecValue {
    fn from(v: bool) -> Self {
        SpecValue::Bool(v)
    }
}
impl From<i64> for SpecValue {
    fn from(v: i64) -> Self {
        SpecValue::Int(v)
    }
}
impl From<f64> for SpecValue {
    fn from(v: f64) -> Self {
        SpecValue::Float(v)
    }
}
impl From<&str> for SpecValue {
    fn from(v: &str) -> Self {
        SpecValue::Str(v.to_string())
    }
}
impl From<String> for SpecValue {
    fn from(v: String) -> Self {
        SpecValue::Str(v)
    }
}
impl From<Vec<SpecValue>> for SpecValue {
    fn from(v: Vec<SpecValue>) -> Self {
        SpecValue::Array(v)
    }
}

/// A stage's parameter record σ: a map from string keys to JSON-like
/// values. Keys are unique by construction; the map stores them sorted, so
/// insertion order never affects the canonical bytes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageSpec {
    entries: BTreeMap<String, SpecValue>,
}

impl StageSpec {
    /// Empty spec (canonicalizes to `{}`).
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insertion.
    pub fn with(mut self, key: impl Into<String>, value: impl Into<SpecValue>) -> Self {
        self.entries.insert(key.into(), value.into());
        self
    }

    /// Insert or replace an entry.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<SpecValue>) {
        self.entries.insert(key.into(), value.into());
    }

    /// Look up an entry.
    pub fn get(&self, key: &str) -> Option<&SpecValue> {
        self.entries.get(key)
    }

    /// All entries in key order.
    pub fn entries(&self) -> &BTreeMap<String, SpecValue> {
        &self.entries
    }

    /// Parse a JSON object into a spec; rejects null values, non-object
    /// top levels, and integers outside the signed 64-bit range.
    pub fn from_json(text: &str) -> Result<Self, ChainError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ChainError::Parse(e.to_string()))?;
        match spec_value_from_json(value)? {
            SpecValue::Map(entries) => Ok(Self { entries }),
            _ => Err(ChainError::NotAnObject),
        }
    }

    /// Canonical bytes rendered as a `String` (canonical JSON is UTF-8).
    pub fn canonical_string(&self) -> Result<String, ChainError> {
        let bytes = canonicalize(self)?;
        Ok(String::from_utf8(bytes).expect("canonical output is UTF-8"))
    }
}

fn spec_value_from_json(value: serde_json::Value) -> Result<SpecValue, ChainError> {
    match value {
        serde_json::Value::Null => Err(ChainError::NullValue),
        serde_json::Value::Bool(b) => Ok(SpecValue::Bool(b)),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(SpecValue::Int(i))
            } else if let Some(u) = n.as_u64() {
                Err(ChainError::IntegerOutOfRange(u))
            } else {
                let f = n.as_f64().expect("serde_json numbers are i64, u64, or f64");
                if f.is_finite() {
                    Ok(SpecValue::Float(f))
                } else {
                    Err(ChainError::NonFiniteNumber(f))
                }
            }
        }
        serde_json::Value::String(s) => Ok(SpecValue::Str(s)),
        serde_json::Value::Array(items) => Ok(SpecValue::Array(
            items.into_iter().map(spec_value_from_json).collect::<Result<_, _>>()?,
        )),
        serde_json::Value::Object(fields) => {
            let mut entries = BTreeMap::new();
            for (k, v) in fields {
                entries.insert(k, spec_value_from_json(v)?);
            }
            Ok(SpecValue::Map(entries))
        }
    }
}

fn emit_string(s: &str, out: &mut Vec<u8>) {
    out.push(b'"');
    for ch in s.chars() {
        match ch {
            '"' => out.extend_from_slice(b"\\\""),
            '\\' => out.extend_from_slice(b"\\\\"),
            '\u{8}' => out.extend_from_slice(b"\\b"),
            '\t' => out.extend_from_slice(b"\\t"),
            '\n' => out.extend_from_slice(b"\\n"),
            '\u{c}' => out.extend_from_slice(b"\\f"),
            '\r' => out.extend_from_slice(b"\\r"),
            c if (c as u32) < 0x20 => {
                out.extend_from_slice(format!("\\u{:04x}", c as u32).as_bytes());
            }
            c => {
                let mut buf = [0u8; 4];
                out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
        }
    }
    out.push(b'"');
}

fn emit_value(value: &SpecValue, out: &mut Vec<u8>) -> Result<(), ChainError> {
    match value {
        SpecValue::Bool(b) => out.extend_from_slice(if *b { b"true" } else { b"false" }),
        SpecValue::Int(i) => out.extend_from_slice(i.to_string().as_bytes()),
        SpecValue::Float(f) => {
            if !f.is_finite() {
                return Err(ChainError::NonFiniteNumber(*f));
            }
            // Display for f64 is the shortest string that round-trips and
            // never uses exponent notation; integral values print without a
            // fractional part. Negative zero is normalised to zero so the
            // two bit patterns share one canonical form.
            let normalised = if *f == 0.0 { 0.0 } else { *f };
            out.extend_from_slice(format!("{normalised}").as_bytes());
        }
        SpecValue::Str(s) => emit_string(s, out),
        SpecValue::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                emit_value(item, out)?;
            }
            out.push(b']');
        }
        SpecValue::Map(entries) => {
            out.push(b'{');
            for (i, (key, val)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                emit_string(key, out);
                out.push(b':');
                emit_value(val, out)?;
            }
            out.push(b'}');
        }
    }
    Ok(())
}

/// Render a spec in canonical form: byte-sorted keys at every level, no
/// whitespace, deterministic number and string formats. The same input
/// always yields the same bytes, and parsing the output re-canonicalizes
/// to identical bytes.
pub fn canonicalize(spec: &StageSpec) -> Result<Vec<u8>, ChainError> {
    let mut out = Vec::new();
    emit_value(&SpecValue::Map(spec.entries.clone()), &mut out)?;
    Ok(out)
}

/// The chain-hash step: `SHA-256(prev_head_ascii ∥ canonical(spec))` as
/// 64 lowercase hex characters.
pub fn chain_hash(prev_head: &str, spec: &StageSpec) -> Result<String, ChainError> {
    let mut hasher = Sha256::new();
    hasher.update(prev_head.as_bytes());
    hasher.update(canonicalize(spec)?);
    Ok(hex::encode(hasher.finalize()))
}

/// One committed stage: name, parameter record, and its chain linkage.
///
/// Fields are public so adversarial tests and the attack scenarios can
/// forge records; honestly-built records always satisfy
/// `hash = SHA-256(prev_hash ∥ canonical(spec))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    /// Stage name, informational only — it is **not** hashed separately
    /// and must appear inside the spec under key `"name"` to be protected.
    pub stage_name: String,
    /// The committed parameter record.
    pub spec: StageSpec,
    /// Head the record was chained onto (64 lowercase hex chars).
    pub prev_hash: String,
    /// This record's chain hash (64 lowercase hex chars).
    pub hash: String,
}

/// Why verification failed at a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainFault {
    /// Stored hash differs from the hash recomputed over
    /// `prev_hash ∥ canonical(spec)` — the record was edited in place.
    RecomputedHashMismatch,
    /// The record's `prev_hash` does not match the preceding head — a
    /// record was inserted or removed.
    LinkageBroken,
}

impl ChainFault {
    /// Stable serialization label.
    pub fn label(&self) -> &'static str {
        match self {
            ChainFault::RecomputedHashMismatch => "recomputed-hash-mismatch",
            ChainFault::LinkageBroken => "prev-hash-linkage-broken",
        }
    }
}

impl fmt::Display for ChainFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of a full-chain replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVerification {
    /// Every linkage and every recomputed hash matches.
    Ok,
    /// First mismatch, scanning from genesis.
    Failed {
        /// Index of the offending record.
        index: usize,
        /// What mismatched there.
        fault: ChainFault,
    },
}

impl ChainVerification {
    /// Whether the replay found no mismatch.
    pub fn is_ok(&self) -> bool {
        matches!(self, ChainVerification::Ok)
    }
}

/// The append-only, hash-chained audit trail.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditLog {
    records: Vec<ChainRecord>,
}

impl AuditLog {
    /// Empty log with head = genesis.
    pub fn new() -> Self {
        Self::default()
    }

    /// Assemble a log from pre-built records **without** validation — the
    /// entry point for adversarial construction (attack scenarios, import
    /// before re-verification, mutation tests). Honest writers use
    /// [`AuditLog::append`].
    pub fn from_records(records: Vec<ChainRecord>) -> Self {
        Self { records }
    }

    /// Current head: the last record's hash, or genesis when empty.
    pub fn head(&self) -> &str {
        self.records.last().map_or(GENESIS_HEAD, |r| r.hash.as_str())
    }

    /// Committed records in chain order.
    pub fn records(&self) -> &[ChainRecord] {
        &self.records
    }

    /// Number of committed records.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Whether no record has been committed.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Commit a stage: chain its canonical spec onto the current head and
    /// advance. Returns the committed record.
    pub fn append(
        &mut self,
        name: impl Into<String>,
        spec: StageSpec,
    ) -> Result<ChainRecord, ChainError> {
        let prev_hash = self.head().to_string();
        let hash = chain_hash(&prev_hash, &spec)?;
        let record = ChainRecord { stage_name: name.into(), spec, prev_hash, hash };
        self.records.push(record.clone());
        Ok(record)
    }

    /// Replay the whole chain from genesis: at each record check the
    /// linkage to the preceding head first, then the recomputed hash.
    /// Reports the first mismatch; an empty log is vacuously ok.
    pub fn verify_full_chain(&self) -> ChainVerification {
        let mut head = GENESIS_HEAD.to_string();
        for (index, record) in self.records.iter().enumerate() {
            if record.prev_hash != head {
                return ChainVerification::Failed { index, fault: ChainFault::LinkageBroken };
            }
            let recomputed = match chain_hash(&record.prev_hash, &record.spec) {
                Ok(h) => h,
                // Non-canonicalizable spec cannot match any stored hash.
                Err(_) => {
                    return ChainVerification::Failed {
                        index,
                        fault: ChainFault::RecomputedHashMismatch,
                    }
                }
            };
            if recomputed != record.hash {
                return ChainVerification::Failed {
                    index,
                    fault: ChainFault::RecomputedHashMismatch,
                };
            }
            head = record.hash.clone();
        }
        ChainVerification::Ok
    }

    /// Export one canonical JSON object per line with fields
    /// `hash`, `name`, `prev_hash`, `spec` (keys in canonical order).
    pub fn export_jsonl(&self) -> Result<String, ChainError> {
        let mut out = String::new();
        for record in &self.records {
            let mut line = BTreeMap::new();
            line.insert("name".to_string(), SpecValue::Str(record.stage_name.clone()));
            line.insert("spec".to_string(), SpecValue::Map(record.spec.entries.clone()));
            line.insert("prev_hash".to_string(), SpecValue::Str(record.prev_hash.clone()));
            line.insert("hash".to_string(), SpecValue::Str(record.hash.clone()));
            let mut bytes = Vec::new();
            emit_value(&SpecValue::Map(line), &mut bytes)?;
            out.push_str(&String::from_utf8(bytes).expect("canonical output is UTF-8"));
            out.push('\n');
        }
        Ok(out)
    }

    /// Import a JSONL export and re-verify the chain; a log that fails
    /// replay is rejected with the failing index and fault.
    pub fn import_jsonl(text: &str) -> Result<Self, ChainError> {
        let mut records = Vec::new();
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(line).map_err(|e| ChainError::Parse(e.to_string()))?;
            let SpecValue::Map(mut fields) = spec_value_from_json(value)? else {
                return Err(ChainError::NotAnObject);
            };
            let take_str = |fields: &mut BTreeMap<String, SpecValue>,
                            key: &'static str|
             -> Result<String, ChainError> {
                match fields.remove(key) {
                    Some(SpecValue::Str(s)) => Ok(s),
                    Some(_) => Err(ChainError::BadFieldType(key)),
                    None => Err(ChainError::MissingField(key)),
                }
            };
            let stage_name = take_str(&mut fields, "name")?;
            let prev_hash = take_str(&mut fields, "prev_hash")?;
            let hash = take_str(&mut fields, "hash")?;
            let spec = match fields.remove("spec") {
                Some(SpecValue::Map(entries)) => StageSpec { entries },
                Some(_) => return Err(ChainError::BadFieldType("spec")),
                None => return Err(ChainError::MissingField("spec")),
            };
            if let Some(extra) = fields.into_keys().next() {
                return Err(ChainError::UnexpectedField(extra));
            }
            records.push(ChainRecord { stage_name, spec, prev_hash, hash });
        }
        let log = Self { records };
        match log.verify_full_chain() {
            ChainVerification::Ok => Ok(log),
            ChainVerification::Failed { index, fault } => {
                Err(ChainError::ImportVerification { index, fault })
            }
        }
    }
}

/// The four audit-trail scenarios: the honest chain and the three attacks
/// against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainScenario {
    /// Clean chain; replay verifies ok.
    Honest,
    /// The spec at [`TAMPER_INDEX`] is edited after commit; replay fails
    /// there with a recomputed-hash mismatch.
    Tamper,
    /// A forged record with a correctly computed hash is spliced in at
    /// [`INJECT_INDEX`]; replay fails at the *following* record, whose
    /// linkage no longer matches.
    Inject,
    /// The record at [`SKIP_INDEX`] is removed; replay fails at that index
    /// with broken linkage.
    Skip,
}

impl ChainScenario {
    /// Stable serialization label.
    pub fn label(&self) -> &'static str {
        match self {
            ChainScenario::Honest => "honest",
            ChainScenario::Tamper => "tamper",
            ChainScenario::Inject => "inject",
            ChainScenario::Skip => "skip",
        }
    }
}

/// Deterministically alter one entry of a spec (used by the tamper and
/// rewrite scenarios): the first entry in key order is nudged to a
/// different value; an empty spec gains a marker entry.
pub fn mutate_spec(spec: &StageSpec) -> StageSpec {
    let mut mutated = spec.clone();
    match mutated.entries.iter().next().map(|(k, v)| (k.clone(), v.clone())) {
        Some((key, value)) => {
            let new_value = match value {
                SpecValue::Bool(b) => SpecValue::Bool(!b),
                SpecValue::Int(i) => SpecValue::Int(i.wrapping_add(1)),
                SpecValue::Float(f) => SpecValue::Float(f + 1.0),
                SpecValue::Str(mut s) => {
                    s.push('~');
                    SpecValue::Str(s)
                }
                SpecValue::Array(mut items) => {
                    items.push(SpecValue::Bool(true));
                    SpecValue::Array(items)
                }
                SpecValue::Map(mut entries) => {
                    entries.insert("tampered".to_string(), SpecValue::Bool(true));
                    SpecValue::Map(entries)
                }
            };
            mutated.entries.insert(key, new_value);
        }
        None => {
            mutated.entries.insert("tampered".to_string(), SpecValue::Bool(true));
        }
    }
    mutated
}

/// Build the chain for one scenario from a base stage list (≥ 4 stages).
/// The honest variant satisfies every invariant; the attack variants
/// deliberately violate them so the verifier can be exercised.
pub fn scenario(kind: ChainScenario, base: &[(String, StageSpec)]) -> Result<AuditLog, ChainError> {
    if base.len() < 4 {
        return Err(ChainError::ScenarioBaseTooShort { need: 4, got: base.len() });
    }
    let mut log = AuditLog::new();
    for (name, spec) in base {
        log.append(name.clone(), spec.clone())?;
    }
    match kind {
        ChainScenario::Honest => {}
        ChainScenario::Tamper => {
            // Post-commit, in-place edit: spec changes, stored hash stays.
            log.records[TAMPER_INDEX].spec = mutate_spec(&log.records[TAMPER_INDEX].spec);
        }
        ChainScenario::Inject => {
            // Forge a record whose own hash is computed correctly from the
            // head it claims, so only the next record's linkage betrays it.
            let prev_hash = log.records[INJECT_INDEX - 1].hash.clone();
            let spec = StageSpec::new().with("injected", true).with("name", "injected_stage");
            let hash = chain_hash(&prev_hash, &spec)?;
            log.records.insert(
                INJECT_INDEX,
                ChainRecord { stage_name: "injected_stage".to_string(), spec, prev_hash, hash },
            );
        }
        ChainScenario::Skip => {
            log.records.remove(SKIP_INDEX);
        }
    }
    Ok(log)
}
