//! Pure states and density operators with validated physicality.
//!
//! A [`PureState`] wraps an amplitude vector with unit norm (within 1e-12).
//! A [`DensityOperator`] wraps a Hermitian matrix with unit trace (within
//! 1e-12) and eigenvalues ≥ −1e-10. Construction fails loudly on anything
//! else, so downstream code can treat every instance as a physical state.

use num_complex::Complex64;
use thiserror::Error;

use super::matrix::{ComplexMatrix, MatrixError};

/// Allowed deviation of the trace from exactly one.
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// Most negative eigenvalue tolerated before a state is rejected.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Errors from density-operator construction.
#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    /// Underlying matrix problem.
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    /// The matrix is not Hermitian.
    #[error("density operator must be Hermitian")]
    NotHermitian,
    /// Trace differs from one by more than [`TRACE_TOLERANCE`].
    #[error("density operator trace is {0}, expected 1 within {TRACE_TOLERANCE}")]
    BadTrace(f64),
    /// An eigenvalue falls below [`EIGENVALUE_FLOOR`].
    #[error("density operator has eigenvalue {0} below the positivity floor")]
    NegativeEigenvalue(f64),
    /// State-vector length is not 2 or 4.
    #[error("state vector must have 2 or 4 amplitudes, got {0}")]
    BadVectorLength(usize),
    /// State vector has (near-)zero norm.
    #[error("state vector norm is {0}, too small to normalise")]
    ZeroNorm(f64),
    /// Amplitude norm differs from one by more than 1e-12.
    #[error("pure state has squared norm {0}, expected 1 within 1e-12")]
    NotNormalised(f64),
}

/// A pure state `|ψ⟩` of one or two qubits, with ∑|amplitude|² = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wrap an amplitude vector, requiring unit norm within 1e-12.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(StateError::BadVectorLength(dim));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(StateError::NotNormalised(norm_sq));
        }
        Ok(Self { amplitudes })
    }

    /// Normalise an arbitrary nonzero amplitude vector into a pure state.
    pub fn normalised(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(StateError::BadVectorLength(dim));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(StateError::ZeroNorm(norm));
        }
        let scaled = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { amplitudes: scaled })
    }

    /// Computational basis state `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self, StateError> {
        if dim != 2 && dim != 4 {
            return Err(StateError::BadVectorLength(dim));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    /// Hilbert-space dimension (2 or 4).
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitude vector.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Apply a unitary: `|ψ⟩ ↦ U|ψ⟩`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self, StateError> {
        if u.dim() != self.dim() {
            return Err(StateError::BadVectorLength(u.dim()));
        }
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (i, slot) in out.iter_mut().enumerate() {
            for j in 0..dim {
                *slot += u.get(i, j) * self.amplitudes[j];
            }
        }
        // A unitary preserves the norm, but guard against uses with merely
        // approximately unitary matrices.
        Self::normalised(out)
    }

    /// The projector `|ψ⟩⟨ψ|` as a density operator.
    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_state_vector(&self.amplitudes)
            .expect("unit-norm amplitudes always form a valid density operator")
    }
}

/// A validated density operator on a 2- or 4-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validate and wrap a candidate density matrix.
    ///
    /// Checks Hermiticity, unit trace (±1e-12) and spectrum ≥ −1e-10.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        if !matrix.is_hermitian(1e-10) {
            return Err(StateError::NotHermitian);
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(StateError::BadTrace(tr.re));
        }
        let eig = matrix.hermitian_eigenvalues()?;
        if let Some(&min) = eig.first() {
            if min < EIGENVALUE_FLOOR {
                return Err(StateError::NegativeEigenvalue(min));
            }
        }
        Ok(Self { matrix })
    }

    /// Pure state `|ψ⟩⟨ψ|` from an amplitude vector, normalising it first.
    pub fn from_state_vector(amplitudes: &[Complex64]) -> Result<Self, StateError> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(StateError::BadVectorLength(dim));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(StateError::ZeroNorm(norm));
        }
        let mut m = ComplexMatrix::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, amplitudes[i] * amplitudes[j].conj() / (norm * norm));
            }
        }
        Self::new(m)
    }

    /// Computational basis state `|k⟩⟨k|` in the given dimension.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self, StateError> {
        if dim != 2 && dim != 4 {
            return Err(StateError::BadVectorLength(dim));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Self::from_state_vector(&amps)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self, StateError> {
        let m = ComplexMatrix::identity(dim)?.scale(Complex64::new(1.0 / dim as f64, 0.0));
        Self::new(m)
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Hilbert-space dimension (2 or 4).
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Purity `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.matrix.mul(&self.matrix).expect("same dim").trace().re
    }

    /// Trace out the first qubit of a two-qubit state, leaving the second.
    ///
    /// With row-major index `i = 2·i₁ + i₂` (first qubit is the high bit),
    /// the reduced state is `ρ'[a][b] = Σ_k ρ[2k+a][2k+b]`.
    pub fn partial_trace_first(&self) -> Result<Self, StateError> {
        if self.dim() != 4 {
            return Err(StateError::BadVectorLength(self.dim()));
        }
        let mut out = ComplexMatrix::zeros(2)?;
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += self.matrix.get(2 * k + a, 2 * k + b);
                }
                out.set(a, b, acc);
            }
        }
        Self::new(out)
    }
}
