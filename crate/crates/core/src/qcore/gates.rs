//! Standard single-qubit gates as 2×2 unitaries.
//!
//! Conventions: rotations are `R_a(θ) = exp(−i θ σ_a / 2)`, so
//! `R_y(θ)|0⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩`. The Hadamard and phase gates use
//! the usual computational-basis matrices. Rotation constructors reject
//! non-finite angles; the fixed gates cannot fail.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, MatrixError};
use crate::rng::SplitMix64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_finite(theta: f64) -> Result<(), MatrixError> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(MatrixError::NonFiniteAngle(theta))
    }
}

/// Rotation about the X axis: `R_x(θ) = [[cos θ/2, −i sin θ/2], [−i sin θ/2, cos θ/2]]`.
pub fn rx(theta: f64) -> Result<ComplexMatrix, MatrixError> {
    check_finite(theta)?;
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(ComplexMatrix::from2(
        Complex64::new(c, 0.0),
        Complex64::new(0.0, -s),
        Complex64::new(0.0, -s),
        Complex64::new(c, 0.0),
    ))
}

/// Rotation about the Y axis: `R_y(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
pub fn ry(theta: f64) -> Result<ComplexMatrix, MatrixError> {
    check_finite(theta)?;
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(ComplexMatrix::from2(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ))
}

/// Rotation about the Z axis: `R_z(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
pub fn rz(theta: f64) -> Result<ComplexMatrix, MatrixError> {
    check_finite(theta)?;
    let half = 0.5 * theta;
    Ok(ComplexMatrix::from2(
        Complex64::from_polar(1.0, -half),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, half),
    ))
}

/// Phase gate `S = diag(1, i)`.
pub fn s_gate() -> ComplexMatrix {
    ComplexMatrix::from2(ONE, ZERO, ZERO, Complex64::new(0.0, 1.0))
}

/// Inverse phase gate `S† = diag(1, −i)`.
pub fn s_dagger() -> ComplexMatrix {
    ComplexMatrix::from2(ONE, ZERO, ZERO, Complex64::new(0.0, -1.0))
}

/// Hadamard gate `H = (1/√2)[[1, 1], [1, −1]]`.
pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from2(
        Complex64::new(h, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
    )
}

/// Haar-distributed random qubit unitary (up to global phase).
///
/// Uses the Euler-angle parameterisation `U = R_z(α) R_y(θ) R_z(β)` with
/// `α, β ~ U[0, 2π)` and `θ = 2 asin(√u)` for `u ~ U[0, 1)`, which makes
/// `cos θ` uniform on `[−1, 1]` — the Haar measure on SU(2) modulo phase.
pub fn haar_random(rng: &mut SplitMix64) -> ComplexMatrix {
    let two_pi = 2.0 * std::f64::consts::PI;
    let alpha = rng.uniform(0.0, two_pi);
    let beta = rng.uniform(0.0, two_pi);
    let theta = 2.0 * rng.next_f64().sqrt().asin();
    rz(alpha)
        .and_then(|a| a.mul(&ry(theta)?))
        .and_then(|m| m.mul(&rz(beta)?))
        .expect("angles from the RNG are always finite")
}
