//! Matrix and channel distance measures.
//!
//! Singular-value based norms (trace norm, operator norm), trace distance
//! between states, the exact diamond distance between single-qubit unitary
//! channels, a Fibonacci-lattice lower-bound estimator for the diamond
//! distance of arbitrary channels, global-phase equivalence, and the Bloch
//! rotation matrix of a qubit unitary.

use num_complex::Complex64;
use thiserror::Error;

use super::channel::{Channel, ChannelError};
use super::matrix::{ComplexMatrix, MatrixError};
use super::observable::ALL_PAULIS;
use super::state::{DensityOperator, StateError};

/// Grid size used by [`diamond_lower_bound`] callers that want the default
/// resolution (≈0.035 rad spacing on the Bloch sphere).
pub const DEFAULT_BLOCH_GRID_POINTS: usize = 10_000;

/// Errors from norm and distance computations.
#[derive(Debug, Error, PartialEq)]
pub enum NormError {
    /// Operation restricted to single-qubit (2×2) operators.
    #[error("operation requires dimension 2, got {0}")]
    RequiresQubit(usize),
    /// A unitary matrix was required.
    #[error("matrix is not unitary within tolerance 1e-10")]
    NotUnitary,
    /// Grid estimator called with an empty grid.
    #[error("grid estimator requires at least one point")]
    EmptyGrid,
    /// Underlying matrix failure.
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    /// Underlying channel failure.
    #[error(transparent)]
    Channel(#[from] ChannelError),
    /// Underlying state failure.
    #[error(transparent)]
    State(#[from] StateError),
}

/// Singular values of a matrix, descending.
///
/// Computed as the square roots of the (clamped-nonnegative) eigenvalues of
/// `M†M`, which is Hermitian by construction.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>, NormError> {
    let gram = m.adjoint().mul(m)?;
    let mut sv: Vec<f64> =
        gram.hermitian_eigenvalues()?.into_iter().map(|lambda| lambda.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    Ok(sv)
}

/// Trace norm `‖M‖₁` (sum of singular values).
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64, NormError> {
    Ok(singular_values(m)?.iter().sum())
}

/// Operator norm `‖M‖∞` (largest singular value).
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64, NormError> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Trace distance `T(ρ, σ) = ½‖ρ − σ‖₁` between two states.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, NormError> {
    Ok(0.5 * trace_norm(&rho.matrix().sub(sigma.matrix())?)?)
}

/// Exact diamond distance between two single-qubit unitary channels.
///
/// With `W = U†V` and `Δ ∈ [0, π]` the angular separation of the two
/// eigenphases of `W`, the diamond distance is `2 sin(Δ/2)`: the chord
/// between the eigenvalues of `W` sits at distance `cos(Δ/2)` from the
/// origin, and the ancilla-assisted optimisation turns that into
/// `2√(1 − cos²(Δ/2))`.
pub fn diamond_distance_unitary(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64, NormError> {
    if u.dim() != 2 {
        return Err(NormError::RequiresQubit(u.dim()));
    }
    if v.dim() != 2 {
        return Err(NormError::RequiresQubit(v.dim()));
    }
    if !u.is_unitary(1e-10) || !v.is_unitary(1e-10) {
        return Err(NormError::NotUnitary);
    }
    let w = u.adjoint().mul(v)?;
    let tr = w.trace();
    let det = w.get(0, 0) * w.get(1, 1) - w.get(0, 1) * w.get(1, 0);
    // Eigenvalues of a 2×2 matrix from the characteristic quadratic.
    let disc = (tr * tr - det.scale(4.0)).sqrt();
    let lambda1 = (tr + disc) * Complex64::new(0.5, 0.0);
    let lambda2 = (tr - disc) * Complex64::new(0.5, 0.0);
    let raw = (lambda1.arg() - lambda2.arg()).abs();
    let delta = raw.min(2.0 * std::f64::consts::PI - raw);
    Ok(2.0 * (0.5 * delta).sin())
}

/// Whether `U` and `V` agree up to a global phase: `|Tr(U†V)| = dim` within `tol`.
pub fn global_phase_equivalent(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<bool, NormError> {
    let overlap = u.adjoint().mul(v)?.trace().norm();
    Ok((overlap - u.dim() as f64).abs() <= tol)
}

/// Pure qubit states on a Fibonacci lattice covering the Bloch sphere.
pub fn fibonacci_bloch_states(points: usize) -> Result<Vec<DensityOperator>, NormError> {
    if points == 0 {
        return Err(NormError::EmptyGrid);
    }
    let golden = 0.5 * (1.0 + 5.0_f64.sqrt());
    let mut states = Vec::with_capacity(points);
    for k in 0..points {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / points as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
        let (x, y) = (r * phi.cos(), r * phi.sin());
        // ρ = ½(I + x·X + y·Y + z·Z), a pure state for unit Bloch vectors.
        let m = ComplexMatrix::from2(
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        );
        states.push(DensityOperator::new(m)?);
    }
    Ok(states)
}

/// Lower bound on the diamond distance between two qubit channels.
///
/// Maximises the output trace distance over a Fibonacci lattice of pure
/// input states. No ancilla is used, so the result never exceeds (and for
/// non-unital differences can be well below) the true diamond distance;
/// its value is a certified lower bound up to grid resolution.
pub fn diamond_lower_bound(a: &Channel, b: &Channel, points: usize) -> Result<f64, NormError> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(NormError::RequiresQubit(a.dim().max(b.dim())));
    }
    let mut best: f64 = 0.0;
    for rho in fibonacci_bloch_states(points)? {
        let d = trace_distance(&a.apply(&rho)?, &b.apply(&rho)?)?;
        best = best.max(d);
    }
    Ok(best)
}

/// Bloch rotation matrix of a qubit unitary: `R[p][q] = ½ Tr(σ_p U σ_q U†)`.
///
/// `R` is the 3×3 real orthogonal matrix by which `U` rotates Bloch vectors;
/// rows and columns are ordered (X, Y, Z).
pub fn bloch_rotation(u: &ComplexMatrix) -> Result<[[f64; 3]; 3], NormError> {
    if u.dim() != 2 {
        return Err(NormError::RequiresQubit(u.dim()));
    }
    if !u.is_unitary(1e-10) {
        return Err(NormError::NotUnitary);
    }
    let mut r = [[0.0_f64; 3]; 3];
    let udag = u.adjoint();
    for (q, pauli_q) in ALL_PAULIS.iter().enumerate() {
        let evolved = u.mul(&pauli_q.matrix())?.mul(&udag)?;
        for (p, pauli_p) in ALL_PAULIS.iter().enumerate() {
            r[p][q] = 0.5 * pauli_p.matrix().mul(&evolved)?.trace().re;
        }
    }
    Ok(r)
}
