//! Quantum channels: unitary conjugation, depolarizing noise, and
//! sequential composition.
//!
//! A [`Channel`] is constructed through validating constructors and applied
//! to [`DensityOperator`]s. Composition order follows application order:
//! `Channel::composition(vec![a, b])` applies `a` first, then `b`.

use num_complex::Complex64;
use thiserror::Error;

use super::matrix::{ComplexMatrix, MatrixError};
use super::state::{DensityOperator, StateError};

/// Errors from channel construction and application.
#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    /// The matrix given to [`Channel::unitary`] is not unitary.
    #[error("matrix is not unitary within tolerance 1e-10")]
    NotUnitary,
    /// Depolarizing probability outside `[0, 1]`.
    #[error("depolarizing probability {0} is outside [0, 1]")]
    BadProbability(f64),
    /// Composition parts act on different dimensions.
    #[error("composition mixes dimensions {0} and {1}")]
    DimMismatch(usize, usize),
    /// Composition of zero channels is not defined here.
    #[error("composition requires at least one channel")]
    EmptyComposition,
    /// Channel dimension does not match the input state.
    #[error("channel dimension {0} does not match state dimension {1}")]
    StateDimMismatch(usize, usize),
    /// Underlying matrix failure.
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    /// Output failed density-operator validation (numerical drift).
    #[error(transparent)]
    State(#[from] StateError),
}

/// The structural form of a channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    /// Unitary conjugation `ρ ↦ U ρ U†`.
    Unitary(ComplexMatrix),
    /// Depolarizing map `ρ ↦ (1−p)ρ + p·I/d`.
    Depolarizing {
        /// Probability of full depolarization.
        p: f64,
    },
    /// Sequential composition; element 0 is applied first.
    Composition(Vec<Channel>),
}

/// A completely positive trace-preserving map on 2- or 4-dimensional states.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kind: ChannelKind,
    dim: usize,
}

impl Channel {
    /// Unitary channel `ρ ↦ U ρ U†`; rejects non-unitary matrices.
    pub fn unitary(u: ComplexMatrix) -> Result<Self, ChannelError> {
        if !u.is_unitary(1e-10) {
            return Err(ChannelError::NotUnitary);
        }
        let dim = u.dim();
        Ok(Self { kind: ChannelKind::Unitary(u), dim })
    }

    /// Depolarizing channel with probability `p` on dimension `dim`.
    pub fn depolarizing(p: f64, dim: usize) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(ChannelError::BadProbability(p));
        }
        // Validate the dimension eagerly via an identity construction.
        ComplexMatrix::identity(dim)?;
        Ok(Self { kind: ChannelKind::Depolarizing { p }, dim })
    }

    /// Identity channel on the given dimension.
    pub fn identity(dim: usize) -> Result<Self, ChannelError> {
        Self::unitary(ComplexMatrix::identity(dim)?)
    }

    /// Sequential composition; `parts[0]` is applied first.
    pub fn composition(parts: Vec<Channel>) -> Result<Self, ChannelError> {
        let first_dim = parts.first().ok_or(ChannelError::EmptyComposition)?.dim;
        for part in &parts {
            if part.dim != first_dim {
                return Err(ChannelError::DimMismatch(first_dim, part.dim));
            }
        }
        Ok(Self { kind: ChannelKind::Composition(parts), dim: first_dim })
    }

    /// Structural form of this channel.
    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    /// Dimension the channel acts on (2 or 4).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Apply the channel to a state.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator, ChannelError> {
        if rho.dim() != self.dim {
            return Err(ChannelError::StateDimMismatch(self.dim, rho.dim()));
        }
        match &self.kind {
            ChannelKind::Unitary(u) => {
                let out = u.mul(rho.matrix())?.mul(&u.adjoint())?;
                Ok(DensityOperator::new(out)?)
            }
            ChannelKind::Depolarizing { p } => {
                let keep = rho.matrix().scale(Complex64::new(1.0 - p, 0.0));
                let mix = ComplexMatrix::identity(self.dim)?
                    .scale(Complex64::new(p / self.dim as f64, 0.0));
                Ok(DensityOperator::new(keep.add(&mix)?)?)
            }
            ChannelKind::Composition(parts) => {
                let mut state = rho.clone();
                for part in parts {
                    state = part.apply(&state)?;
                }
                Ok(state)
            }
        }
    }

    /// Flatten to a single unitary matrix if the channel is noiseless.
    ///
    /// Returns the product of all unitary factors for `Unitary` channels and
    /// compositions thereof; `None` once any depolarizing part appears.
    pub fn as_single_unitary(&self) -> Option<ComplexMatrix> {
        match &self.kind {
            ChannelKind::Unitary(u) => Some(u.clone()),
            ChannelKind::Depolarizing { .. } => None,
            ChannelKind::Composition(parts) => {
                let mut acc = ComplexMatrix::identity(self.dim).ok()?;
                for part in parts {
                    // parts[k] acts after parts[k−1]: left-multiply.
                    acc = part.as_single_unitary()?.mul(&acc).ok()?;
                }
                Some(acc)
            }
        }
    }
}
