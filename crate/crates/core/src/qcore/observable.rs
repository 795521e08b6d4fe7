//! Observables and expectation values.
//!
//! Provides the single-qubit Pauli operators (with the basis-change circuits
//! that rotate each one onto Z for computational-basis measurement) and the
//! expectation functional `⟨O⟩_ρ = Tr(O ρ)`, which for Hermitian `O` and a
//! valid state is real up to rounding; any imaginary residue above 1e-10 is
//! treated as an error rather than silently dropped.

use num_complex::Complex64;
use thiserror::Error;

use super::gates::{hadamard, s_dagger};
use super::matrix::ComplexMatrix;
use super::state::DensityOperator;

/// Largest imaginary part tolerated in `Tr(O ρ)` before erroring.
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-10;

/// Errors from observable construction and expectation evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ObservableError {
    /// Observable must be Hermitian.
    #[error("observable {0:?} is not Hermitian")]
    NotHermitian(String),
    /// Observable and state dimensions differ.
    #[error("observable dimension {0} does not match state dimension {1}")]
    DimMismatch(usize, usize),
    /// `Tr(O ρ)` has an imaginary part above [`IMAGINARY_RESIDUE_TOLERANCE`].
    #[error("expectation has imaginary residue {0}, above tolerance")]
    ImaginaryResidue(f64),
}

/// A labelled Hermitian observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    label: String,
    matrix: ComplexMatrix,
}

impl Observable {
    /// Wrap a Hermitian matrix (within 1e-12 entrywise) under a label.
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix) -> Result<Self, ObservableError> {
        let label = label.into();
        if !matrix.is_hermitian(1e-12) {
            return Err(ObservableError::NotHermitian(label));
        }
        Ok(Self { label, matrix })
    }

    /// The observable for a Pauli operator, labelled "X", "Y" or "Z".
    pub fn pauli(p: Pauli) -> Self {
        Self { label: p.label().to_string(), matrix: p.matrix() }
    }

    /// Display label (e.g. "X", "Z", "H_mol").
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Underlying Hermitian matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Dimension the observable acts on.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Expectation value `Tr(O ρ)` in the given state.
    pub fn expectation(&self, rho: &DensityOperator) -> Result<f64, ObservableError> {
        expectation(self, rho)
    }
}

/// The three single-qubit Pauli observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    /// σ_x.
    X,
    /// σ_y.
    Y,
    /// σ_z.
    Z,
}

/// All Paulis in canonical order (X, Y, Z).
pub const ALL_PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

impl Pauli {
    /// The 2×2 matrix for this Pauli.
    pub fn matrix(self) -> ComplexMatrix {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match self {
            Pauli::X => ComplexMatrix::from2(zero, one, one, zero),
            Pauli::Y => ComplexMatrix::from2(
                zero,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                zero,
            ),
            Pauli::Z => ComplexMatrix::from2(one, zero, zero, -one),
        }
    }

    /// Gates that rotate this Pauli onto Z, in application order.
    ///
    /// With `V` the ordered product of the returned gates, `V P V† = Z`, so
    /// measuring Z after the circuit measures `P` before it:
    /// X → `[H]`, Y → `[S†, H]`, Z → `[]`.
    pub fn basis_change_circuit(self) -> Vec<ComplexMatrix> {
        match self {
            Pauli::X => vec![hadamard()],
            Pauli::Y => vec![s_dagger(), hadamard()],
            Pauli::Z => vec![],
        }
    }

    /// Canonical index (X = 0, Y = 1, Z = 2), used for stream derivation.
    pub fn index(self) -> usize {
        match self {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
        }
    }

    /// Single-letter label.
    pub fn label(self) -> &'static str {
        match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        }
    }
}

/// Expectation value `Tr(O ρ)` of a Hermitian observable in a state.
pub fn expectation(observable: &Observable, rho: &DensityOperator) -> Result<f64, ObservableError> {
    if observable.dim() != rho.dim() {
        return Err(ObservableError::DimMismatch(observable.dim(), rho.dim()));
    }
    let tr = observable.matrix().mul(rho.matrix()).expect("dims checked").trace();
    if tr.im.abs() > IMAGINARY_RESIDUE_TOLERANCE {
        return Err(ObservableError::ImaginaryResidue(tr.im));
    }
    Ok(tr.re)
}
