//! External append-only anchor: the piece of state outside the attacker's
//! write scope.
//!
//! Each committed chain head is submitted to the anchor with a sequence
//! number and timestamp. A local audit trail that was rewritten offline can
//! replay perfectly, but its new heads were never anchored — the
//! contiguous-block check here is what catches globally consistent
//! rewrites.
//!
//! File format (bit-exact, one entry per line, UTF-8, newline-terminated):
//! `seq<TAB>head_hex<TAB>timestamp_ms`. Writers hold an exclusive advisory
//! lock per append; readers take no lock and tolerate a concurrent append
//! by ignoring a trailing partial line. [`MemAnchor`] provides the same
//! interface on a logical clock for demos and benchmarks, keeping their
//! outputs deterministic. Substituting a networked transparency-log client
//! means implementing [`Anchor`] on it.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::auditchain::AuditLog;

/// Errors from anchor submission and verification.
#[derive(Debug, Error)]
pub enum AnchorError {
    /// Heads must be exactly 64 lowercase hex characters.
    #[error("head {0:?} is not 64 lowercase hex characters")]
    InvalidHead(String),
    /// The anchor's storage could not be read or written.
    #[error("anchor unavailable: {0}")]
    Unavailable(#[from] std::io::Error),
    /// A complete stored line does not parse as `seq\thead\tts`.
    #[error("anchor entry at line {0} is malformed")]
    MalformedEntry(usize),
    /// Stored sequence numbers must increase from 0 without gaps.
    #[error("anchor sequence broken at line {0}")]
    SequenceBroken(usize),
}

/// One anchored head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorEntry {
    /// Position in the anchor log, dense from 0.
    pub sequence: u64,
    /// The anchored chain head (64 lowercase hex chars).
    pub head: String,
    /// Submission time in UTC milliseconds ([`MemAnchor`] uses a logical
    /// clock equal to the sequence number).
    pub timestamp_ms: u64,
}

/// Outcome of checking a chain against the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorCheck {
    /// The chain's heads appear, in order, as one contiguous block.
    Ok,
    /// Every head is anchored but they are interleaved with other entries
    /// or reordered.
    NotContiguous,
    /// At least one chain head was never anchored — the signature of an
    /// offline rewrite.
    Absent,
}

impl AnchorCheck {
    /// Whether the contiguous-block check passed.
    pub fn is_ok(&self) -> bool {
        matches!(self, AnchorCheck::Ok)
    }

    /// Stable serialization label.
    pub fn label(&self) -> &'static str {
        match self {
            AnchorCheck::Ok => "ok",
            AnchorCheck::NotContiguous => "not-contiguous",
            AnchorCheck::Absent => "absent",
        }
    }
}

/// An append-only head sink. Implementations must assign dense sequence
/// numbers from 0 and never rewrite existing entries.
pub trait Anchor {
    /// Append a head; returns its sequence number.
    fn submit(&mut self, head: &str) -> Result<u64, AnchorError>;
    /// All complete entries, in storage order.
    fn entries(&self) -> Result<Vec<AnchorEntry>, AnchorError>;
}

fn validate_head(head: &str) -> Result<(), AnchorError> {
    let ok =
        head.len() == 64 && head.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
    if ok {
        Ok(())
    } else {
        Err(AnchorError::InvalidHead(head.to_string()))
    }
}

fn format_entry(entry: &AnchorEntry) -> String {
    format!("{}\t{}\t{}\n", entry.sequence, entry.head, entry.timestamp_ms)
}

fn parse_line(line: &str, line_number: usize) -> Result<AnchorEntry, AnchorError> {
    let mut fields = line.split('\t');
    let sequence = fields
        .next()
        .and_then(|f| f.parse::<u64>().ok())
        .ok_or(AnchorError::MalformedEntry(line_number))?;
    let head = fields.next().ok_or(AnchorError::MalformedEntry(line_number))?;
    validate_head(head).map_err(|_| AnchorError::MalformedEntry(line_number))?;
    let timestamp_ms = fields
        .next()
        .and_then(|f| f.parse::<u64>().ok())
        .ok_or(AnchorError::MalformedEntry(line_number))?;
    if fields.next().is_some() {
        return Err(AnchorError::MalformedEntry(line_number));
    }
    Ok(AnchorEntry { sequence, head: head.to_string(), timestamp_ms })
}

fn parse_log(text: &str) -> Result<Vec<AnchorEntry>, AnchorError> {
    let mut entries = Vec::new();
    let mut rest = text;
    let mut line_number = 0;
    // Only newline-terminated lines are complete; a trailing fragment is a
    // concurrent append in flight and is ignored.
    while let Some(end) = rest.find('\n') {
        let entry = parse_line(&rest[..end], line_number)?;
        if entry.sequence != entries.len() as u64 {
            return Err(AnchorError::SequenceBroken(line_number));
        }
        entries.push(entry);
        rest = &rest[end + 1..];
        line_number += 1;
    }
    Ok(entries)
}

/// File-backed anchor simulating an external timestamping authority.
#[derive(Debug)]
pub struct FileAnchor {
    path: PathBuf,
}

impl FileAnchor {
    /// Open (creating if needed) the anchor file at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AnchorError> {
        OpenOptions::new().append(true).create(true).open(path.as_ref())?;
        Ok(Self { path: path.as_ref().to_path_buf() })
    }

    /// Location of the backing file.
    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Anchor for FileAnchor {
    fn submit(&mut self, head: &str) -> Result<u64, AnchorError> {
        validate_head(head)?;
        let mut file: File =
            OpenOptions::new().read(true).append(true).create(true).open(&self.path)?;
        file.lock()?;
        let result = (|| {
            let mut text = String::new();
            file.read_to_string(&mut text)?;
            let sequence = parse_log(&text)?.len() as u64;
            let timestamp_ms =
                SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
            let entry = AnchorEntry { sequence, head: head.to_string(), timestamp_ms };
            file.write_all(format_entry(&entry).as_bytes())?;
            file.flush()?;
            Ok(sequence)
        })();
        let _ = file.unlock();
        result
    }

    fn entries(&self) -> Result<Vec<AnchorEntry>, AnchorError> {
        let text = std::fs::read_to_string(&self.path)?;
        parse_log(&text)
    }
}

/// In-memory anchor with a logical clock (timestamp = sequence number),
/// used where deterministic output or pure speed matters.
#[derive(Debug, Clone, Default)]
pub struct MemAnchor {
    entries: Vec<AnchorEntry>,
}

impl MemAnchor {
    /// Empty anchor.
    pub fn new() -> Self {
        Self::default()
    }
}

impl Anchor for MemAnchor {
    fn submit(&mut self, head: &str) -> Result<u64, AnchorError> {
        validate_head(head)?;
        let sequence = self.entries.len() as u64;
        self.entries.push(AnchorEntry { sequence, head: head.to_string(), timestamp_ms: sequence });
        Ok(sequence)
    }

    fn entries(&self) -> Result<Vec<AnchorEntry>, AnchorError> {
        Ok(self.entries.clone())
    }
}

/// Check that the chain's heads `h₁..h_n` appear in order as one
/// contiguous block of the anchor (consecutive duplicate submissions of
/// the same head — retries — collapse to one slot). An empty chain is
/// vacuously ok; [`AnchorCheck::Absent`] means some head was never
/// anchored, [`AnchorCheck::NotContiguous`] means all heads are present
/// but interleaved or reordered.
pub fn verify_against_anchor<A: Anchor + ?Sized>(
    anchor: &A,
    log: &AuditLog,
) -> Result<AnchorCheck, AnchorError> {
    let heads: Vec<&str> = log.records().iter().map(|r| r.hash.as_str()).collect();
    if heads.is_empty() {
        return Ok(AnchorCheck::Ok);
    }
    let entries = anchor.entries()?;
    let mut anchored: Vec<&str> = Vec::with_capacity(entries.len());
    for entry in &entries {
        if anchored.last() != Some(&entry.head.as_str()) {
            anchored.push(entry.head.as_str());
        }
    }
    let contiguous = anchored.windows(heads.len()).any(|window| window == heads.as_slice());
    if contiguous {
        return Ok(AnchorCheck::Ok);
    }
    let all_present = heads.iter().all(|h| anchored.contains(h));
    if all_present {
        Ok(AnchorCheck::NotContiguous)
    } else {
        Ok(AnchorCheck::Absent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auditchain::{scenario, ChainScenario, StageSpec};

    fn head_of(byte: u8) -> String {
        String::from_utf8(vec![byte; 64]).unwrap()
    }

    fn base_stages(n: usize) -> Vec<(String, StageSpec)> {
        (0..n).map(|i| (format!("stage_{i}"), StageSpec::new().with("index", i as i64))).collect()
    }

    #[test]
    fn sequences_are_dense_from_zero() {
        let mut anchor = MemAnchor::new();
        for i in 0..5u64 {
            assert_eq!(anchor.submit(&head_of(b'a' + i as u8)).unwrap(), i);
        }
        let entries = anchor.entries().unwrap();
        assert_eq!(entries.len(), 5);
        assert!(entries.iter().enumerate().all(|(i, e)| e.sequence == i as u64));
    }

    #[test]
    fn heads_are_validated() {
        let mut anchor = MemAnchor::new();
        assert!(matches!(anchor.submit("abc"), Err(AnchorError::InvalidHead(_))));
        assert!(matches!(anchor.submit(&head_of(b'A')), Err(AnchorError::InvalidHead(_))));
        assert!(matches!(anchor.submit(&head_of(b'g')), Err(AnchorError::InvalidHead(_))));
        assert!(anchor.submit(&head_of(b'0')).is_ok());
    }

    #[test]
    fn file_anchor_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("anchor.log");
        let mut anchor = FileAnchor::open(&path).unwrap();
        anchor.submit(&head_of(b'a')).unwrap();
        anchor.submit(&head_of(b'b')).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let entries = anchor.entries().unwrap();
        let rebuilt: String = entries.iter().map(format_entry).collect();
        assert_eq!(text, rebuilt);
        assert_eq!(entries[0].sequence, 0);
        assert_eq!(entries[1].sequence, 1);
        assert_eq!(entries[1].head, head_of(b'b'));

        // Line count never decreases: re-open and continue appending.
        let mut reopened = FileAnchor::open(&path).unwrap();
        assert_eq!(reopened.submit(&head_of(b'c')).unwrap(), 2);
        assert_eq!(reopened.entries().unwrap().len(), 3);
    }

    #[test]
    fn readers_ignore_a_trailing_partial_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("anchor.log");
        let mut anchor = FileAnchor::open(&path).unwrap();
        anchor.submit(&head_of(b'a')).unwrap();
        let mut file = OpenOptions::new().append(true).open(&path).unwrap();
        file.write_all(b"1\tdeadbeef").unwrap();
        drop(file);
        let entries = anchor.entries().unwrap();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn malformed_complete_lines_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("anchor.log");
        std::fs::write(&path, "0\tnot-hex\t12\n").unwrap();
        let anchor = FileAnchor::open(&path).unwrap();
        assert!(matches!(anchor.entries(), Err(AnchorError::MalformedEntry(0))));

        std::fs::write(&path, format!("5\t{}\t12\n", head_of(b'a'))).unwrap();
        assert!(matches!(anchor.entries(), Err(AnchorError::SequenceBroken(0))));
    }

    #[test]
    fn honest_run_is_a_contiguous_block() {
        let log = scenario(ChainScenario::Honest, &base_stages(6)).unwrap();
        let mut anchor = MemAnchor::new();
        for record in log.records() {
            anchor.submit(&record.hash).unwrap();
        }
        assert_eq!(verify_against_anchor(&anchor, &log).unwrap(), AnchorCheck::Ok);
        assert_eq!(verify_against_anchor(&anchor, &AuditLog::new()).unwrap(), AnchorCheck::Ok);
    }

    use crate::auditchain::AuditLog;

    #[test]
    fn offline_rewrite_is_absent_from_the_anchor() {
        let honest = scenario(ChainScenario::Honest, &base_stages(6)).unwrap();
        let mut anchor = MemAnchor::new();
        for record in honest.records() {
            anchor.submit(&record.hash).unwrap();
        }
        // Attacker rebuilds a locally consistent chain with one edited spec.
        let mut altered = base_stages(6);
        altered[2].1.insert("index", 99i64);
        let rewrite = scenario(ChainScenario::Honest, &altered).unwrap();
        assert!(rewrite.verify_full_chain().is_ok());
        assert_eq!(verify_against_anchor(&anchor, &rewrite).unwrap(), AnchorCheck::Absent);
    }

    #[test]
    fn interleaved_pipelines_are_not_contiguous() {
        let log_a = scenario(ChainScenario::Honest, &base_stages(4)).unwrap();
        let mut other = base_stages(4);
        other[0].1.insert("pipeline", "b");
        let log_b = scenario(ChainScenario::Honest, &other).unwrap();

        let mut anchor = MemAnchor::new();
        for (ra, rb) in log_a.records().iter().zip(log_b.records()) {
            anchor.submit(&ra.hash).unwrap();
            anchor.submit(&rb.hash).unwrap();
        }
        assert_eq!(verify_against_anchor(&anchor, &log_a).unwrap(), AnchorCheck::NotContiguous);
        assert_eq!(verify_against_anchor(&anchor, &log_b).unwrap(), AnchorCheck::NotContiguous);
    }

    #[test]
    fn consecutive_duplicate_submissions_collapse() {
        let log = scenario(ChainScenario::Honest, &base_stages(4)).unwrap();
        let mut anchor = MemAnchor::new();
        for record in log.records() {
            // Simulate a retry after timeout: every head lands twice.
            anchor.submit(&record.hash).unwrap();
            anchor.submit(&record.hash).unwrap();
        }
        assert_eq!(verify_against_anchor(&anchor, &log).unwrap(), AnchorCheck::Ok);
    }

    #[test]
    fn reordered_heads_are_not_contiguous() {
        let log = scenario(ChainScenario::Honest, &base_stages(4)).unwrap();
        let mut anchor = MemAnchor::new();
        let records = log.records();
        for record in records.iter().rev() {
            anchor.submit(&record.hash).unwrap();
        }
        assert_eq!(verify_against_anchor(&anchor, &log).unwrap(), AnchorCheck::NotContiguous);
    }
}
