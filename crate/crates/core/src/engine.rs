//! The real-time integrity verifier: commit-time enforcement in front of
//! the audit trail.
//!
//! A commit performs four steps in a fixed order: (1) gate every observable
//! check against its tolerance — a failure here means nothing is hashed,
//! appended, or anchored; (2) compute the next chain hash from the current
//! head and the canonical spec; (3) confirm the in-memory head still equals
//! the last persisted record's hash, catching external mutation between
//! commits; (4) append the record and submit the new head to the anchor —
//! an anchor failure keeps the record locally (chain continuity beats
//! anchor completeness) and flags the head as un-anchored for host-driven
//! resubmission.
//!
//! Violations carry a kind ∈ {hash, observable, anchor} naming which of
//! the three mechanisms fired, the stage index, and a human-readable
//! message.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::anchor::{verify_against_anchor, Anchor, AnchorCheck, AnchorError, MemAnchor};
use crate::auditchain::AuditLog;
use crate::auditchain::{ChainError, ChainRecord, ChainVerification, StageSpec};

/// Which integrity mechanism detected a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Chain-head desynchronization or replay mismatch.
    Hash,
    /// An observable check exceeded its calibrated tolerance.
    Observable,
    /// The external anchor rejected or never saw a head.
    Anchor,
}

impl ViolationKind {
    /// Stable serialization label.
    pub fn label(&self) -> &'static str {
        match self {
            ViolationKind::Hash => "hash",
            ViolationKind::Observable => "observable",
            ViolationKind::Anchor => "anchor",
        }
    }
}

/// A detected integrity failure: what fired, where, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrityViolation {
    /// Which mechanism detected it.
    pub kind: ViolationKind,
    /// Index of the offending commit (0-based stage position).
    pub stage_index: usize,
    /// Human-readable detail.
    pub message: String,
}

impl fmt::Display for IntegrityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integrity violation (kind={}) at stage {}: {}",
            self.kind.label(),
            self.stage_index,
            self.message
        )
    }
}

impl std::error::Error for IntegrityViolation {}

/// Errors from the engine: a detected violation, or a malformed input.
#[derive(Debug, Error)]
pub enum EngineError {
    /// One of the three integrity mechanisms fired.
    #[error(transparent)]
    Violation(#[from] IntegrityViolation),
    /// The spec could not be canonicalized (e.g. non-finite number).
    #[error(transparent)]
    Chain(#[from] ChainError),
    /// Stage results need a non-empty name.
    #[error("stage name must be non-empty")]
    EmptyStageName,
    /// Observable checks need finite values and tolerance ≥ 0.
    #[error("observable check {label:?} requires finite values and a tolerance ≥ 0")]
    BadCheck {
        /// Label of the offending check.
        label: String,
    },
    /// The benchmark needs at least one repetition.
    #[error("benchmark requires reps ≥ 1")]
    BadBenchConfig,
}

/// One calibrated measurement gate: the commit passes only if
/// `|measured − reference| ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableCheck {
    /// What was measured (e.g. `"⟨H⟩"`).
    pub label: String,
    /// The measured value.
    pub measured: f64,
    /// The calibrated reference value.
    pub reference: f64,
    /// Allowed absolute deviation ε ≥ 0.
    pub tolerance: f64,
}

impl ObservableCheck {
    /// Build a check; all values must be finite and the tolerance ≥ 0.
    pub fn new(
        label: impl Into<String>,
        measured: f64,
        reference: f64,
        tolerance: f64,
    ) -> Result<Self, EngineError> {
        let label = label.into();
        let finite = measured.is_finite() && reference.is_finite() && tolerance.is_finite();
        if !finite || tolerance < 0.0 {
            return Err(EngineError::BadCheck { label });
        }
        Ok(Self { label, measured, reference, tolerance })
    }

    /// Absolute deviation from the reference.
    pub fn deviation(&self) -> f64 {
        (self.measured - self.reference).abs()
    }

    /// Whether the deviation is within tolerance.
    pub fn passes(&self) -> bool {
        self.deviation() <= self.tolerance
    }
}

/// Everything a stage hands to the verifier: its name, parameter record,
/// and zero or more observable checks.
#[derive(Debug, Clone, PartialEq)]
pub struct StageResult {
    /// Stage name (also recorded in the chain record).
    pub name: String,
    /// Parameter record to be hashed into the chain.
    pub spec: StageSpec,
    /// Calibrated measurement gates, all of which must pass.
    pub observables: Vec<ObservableCheck>,
}

impl StageResult {
    /// Build a result with no observables; the name must be non-empty.
    pub fn new(name: impl Into<String>, spec: StageSpec) -> Result<Self, EngineError> {
        let name = name.into();
        if name.is_empty() {
            return Err(EngineError::EmptyStageName);
        }
        Ok(Self { name, spec, observables: Vec::new() })
    }

    /// Builder-style observable attachment.
    pub fn with_check(mut self, check: ObservableCheck) -> Self {
        self.observables.push(check);
        self
    }
}

/// Per-pipeline verifier holding the audit trail, the anchor, and the
/// in-memory head it expects the trail to be at.
#[derive(Debug)]
pub struct IntegrityVerifier<A: Anchor> {
    log: AuditLog,
    anchor: A,
    expected_head: String,
    unanchored_heads: Vec<String>,
}

impl<A: Anchor> IntegrityVerifier<A> {
    /// Fresh verifier over an empty trail.
    pub fn new(anchor: A) -> Self {
        let log = AuditLog::new();
        let expected_head = log.head().to_string();
        Self { log, anchor, expected_head, unanchored_heads: Vec::new() }
    }

    /// Resume over an existing trail; the expected head is taken from it.
    pub fn resume(log: AuditLog, anchor: A) -> Self {
        let expected_head = log.head().to_string();
        Self { log, anchor, expected_head, unanchored_heads: Vec::new() }
    }

    /// The persisted audit trail.
    pub fn log(&self) -> &AuditLog {
        &self.log
    }

    /// Mutable access to the trail — this models the *storage*, which sits
    /// outside the verifier's trust boundary. Adversarial tests and the
    /// demo attack scenarios edit it directly; the verifier's job is to
    /// notice.
    pub fn log_mut(&mut self) -> &mut AuditLog {
        &mut self.log
    }

    /// The anchor.
    pub fn anchor(&self) -> &A {
        &self.anchor
    }

    /// Heads whose anchor submission failed and awaits host resubmission.
    pub fn unanchored_heads(&self) -> &[String] {
        &self.unanchored_heads
    }

    /// Commit one stage with the four-step protocol. On success the record
    /// is appended, anchored, and returned; on violation the error says
    /// which mechanism fired and the trail reflects exactly the documented
    /// persistence: nothing for observable/hash kinds, the appended but
    /// un-anchored record for anchor kind.
    pub fn commit_stage(&mut self, result: StageResult) -> Result<ChainRecord, EngineError> {
        let stage_index = self.log.len();

        // Step 1: observable gates. A failure here commits nothing.
        for check in &result.observables {
            if !check.passes() {
                return Err(IntegrityViolation {
                    kind: ViolationKind::Observable,
                    stage_index,
                    message: format!(
                        "{}: |{} - {}| = {} exceeds tolerance {}",
                        check.label,
                        check.measured,
                        check.reference,
                        check.deviation(),
                        check.tolerance
                    ),
                }
                .into());
            }
        }

        // Step 2: next chain hash from the in-memory head.
        let next_hash = crate::auditchain::chain_hash(&self.expected_head, &result.spec)?;

        // Step 3: the persisted trail must still end where this verifier
        // left it; otherwise something else wrote (or rewrote) the storage.
        if self.log.head() != self.expected_head {
            return Err(IntegrityViolation {
                kind: ViolationKind::Hash,
                stage_index,
                message: format!(
                    "head desynchronized: expected {}, storage at {}",
                    self.expected_head,
                    self.log.head()
                ),
            }
            .into());
        }

        // Step 4: persist, then anchor the new head.
        let record = self.log.append(result.name, result.spec)?;
        debug_assert_eq!(record.hash, next_hash);
        self.expected_head = record.hash.clone();
        if let Err(err) = self.anchor.submit(&record.hash) {
            self.unanchored_heads.push(record.hash.clone());
            return Err(IntegrityViolation {
                kind: ViolationKind::Anchor,
                stage_index,
                message: format!("anchor submission failed for head {}: {}", record.hash, err),
            }
            .into());
        }
        Ok(record)
    }

    /// Replay the persisted trail from genesis.
    pub fn verify_full_chain(&self) -> ChainVerification {
        self.log.verify_full_chain()
    }

    /// Check the trail's heads form a contiguous block in the anchor.
    pub fn verify_against_anchor(&self) -> Result<AnchorCheck, AnchorError> {
        verify_against_anchor(&self.anchor, &self.log)
    }
}

/// Latency statistics from [`bench_commit`], in microseconds. Percentiles
/// use the nearest-rank method.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchStats {
    /// Stages per synthetic pipeline.
    pub n_stages: usize,
    /// Pipelines run.
    pub reps: usize,
    /// Median single-commit latency.
    pub median_us: f64,
    /// 99th-percentile single-commit latency.
    pub p99_us: f64,
    /// Mean single-commit latency.
    pub mean_us: f64,
    /// Median end-to-end latency of one whole pipeline.
    pub pipeline_median_us: f64,
}

impl BenchStats {
    fn empty(n_stages: usize, reps: usize) -> Self {
        Self { n_stages, reps, median_us: 0.0, p99_us: 0.0, mean_us: 0.0, pipeline_median_us: 0.0 }
    }
}

fn nearest_rank(sorted: &[f64], quantile: f64) -> f64 {
    let rank = (quantile * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Benchmark the commit path: `reps` synthetic pipelines of `n_stages`
/// commits each against an in-memory anchor, wall-clock timed. Zero stages
/// yields empty stats; zero reps is an error.
pub fn bench_commit(n_stages: usize, reps: usize) -> Result<BenchStats, EngineError> {
    if reps == 0 {
        return Err(EngineError::BadBenchConfig);
    }
    if n_stages == 0 {
        return Ok(BenchStats::empty(0, reps));
    }
    let mut commit_us = Vec::with_capacity(n_stages * reps);
    let mut pipeline_us = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut verifier = IntegrityVerifier::new(MemAnchor::new());
        let run_start = Instant::now();
        for i in 0..n_stages {
            let spec = StageSpec::new()
                .with("name", format!("bench_stage_{i}"))
                .with("index", i as i64)
                .with("parameter", 0.5);
            let result = StageResult::new(format!("bench_stage_{i}"), spec)?
                .with_check(ObservableCheck::new("probe", 0.0, 0.0, 0.0)?);
            let start = Instant::now();
            verifier.commit_stage(result)?;
            commit_us.push(start.elapsed().as_secs_f64() * 1e6);
        }
        pipeline_us.push(run_start.elapsed().as_secs_f64() * 1e6);
    }
    commit_us.sort_by(|a, b| a.partial_cmp(b).expect("finite latencies"));
    pipeline_us.sort_by(|a, b| a.partial_cmp(b).expect("finite latencies"));
    let mean_us = commit_us.iter().sum::<f64>() / commit_us.len() as f64;
    Ok(BenchStats {
        n_stages,
        reps,
        median_us: nearest_rank(&commit_us, 0.5),
        p99_us: nearest_rank(&commit_us, 0.99),
        mean_us,
        pipeline_median_us: nearest_rank(&pipeline_us, 0.5),
    })
}
