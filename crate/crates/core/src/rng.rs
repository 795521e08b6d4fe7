//! Deterministic counter-based random number generation.
//!
//! Every stochastic routine in this crate draws from [`SplitMix64`], a 64-bit
//! counter-based generator (Steele, Lea & Flood's SplitMix finalizer over a
//! Weyl sequence). The algorithm is fixed here, in-repo, so that identical
//! seeds produce bit-identical streams on every platform and toolchain —
//! a requirement for reproducible sweep artifacts.
//!
//! ## Stream derivation
//!
//! Parallel sweep cells must not share a stream. [`derive_stream`] maps a
//! `(seed, id₀, id₁, …)` tuple to an independent stream seed by folding each
//! id through the SplitMix64 finalizer:
//!
//! ```text
//! state ← seed
//! for id in ids: state ← mix64(state ⊕ (id + 1)·GOLDEN_GAMMA)
//! ```
//!
//! where `mix64` is [`mix64`] below and `GOLDEN_GAMMA = 0x9E3779B97F4A7C15`.
//! The `+ 1` keeps id 0 from collapsing into a no-op XOR.

/// The SplitMix64 Weyl-sequence increment (2⁶⁴ / φ, odd).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output mixing function (finalizer).
///
/// A bijection on u64 with full avalanche; used both for output generation
/// and for stream-seed derivation.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and a tuple of ids.
///
/// Distinct id tuples yield (with overwhelming probability) decorrelated
/// streams; the derivation is pure arithmetic, so sweep cells can be computed
/// in parallel and merged deterministically.
pub fn derive_stream(seed: u64, ids: &[u64]) -> u64 {
    let mut state = seed;
    for &id in ids {
        state = mix64(state ^ id.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    }
    state
}

/// A SplitMix64 generator: counter-based, splittable, 64-bit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Create a generator from a raw seed.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Create a generator for the stream identified by `(seed, ids…)`.
    pub fn stream(seed: u64, ids: &[u64]) -> Self {
        Self::new(derive_stream(seed, ids))
    }

    /// Next raw 64-bit output.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform double in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Split off an independent child generator (the parent advances once).
    pub fn split(&mut self) -> Self {
        Self::new(mix64(self.next_u64() ^ GOLDEN_GAMMA))
    }
}
