//! Contract-based integrity verification for staged hybrid
//! quantum-classical pipelines.
//!
//! The crate has three layers:
//!
//! * **Numerics** ([`qcore`], [`rng`]): exact 2×2/4×4 complex linear algebra
//!   for states, channels and norms, plus a deterministic splittable RNG so
//!   every simulated experiment is reproducible from a single seed.
//! * **Verification** ([`auditchain`], [`anchor`], [`engine`]): a
//!   hash-chained audit trail over canonically serialised stage records, an
//!   append-only external anchor with contiguity checking, and the
//!   commit-time verifier that gates each stage on its observable contract.
//! * **Applications** ([`contracts`], [`sampling`], [`pipelines`]):
//!   calibrated observable-deviation contracts with their separation
//!   guarantees, finite-shot estimation of Pauli expectations under
//!   depolarizing noise and readout error, and three worked end-to-end
//!   pipeline scenarios.

pub mod anchor;
pub mod auditchain;
pub mod contracts;
pub mod engine;
pub mod pipelines;
pub mod qcore;
pub mod rng;
pub mod sampling;
