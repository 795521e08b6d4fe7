//! Quantum-channel numerics for one and two qubits.
//!
//! Everything here is exact, dependency-free linear algebra on 2×2 and 4×4
//! complex matrices: gates, density operators, channels (unitary,
//! depolarizing, composition), observables and expectation values, and the
//! norm/distance toolbox (trace norm, operator norm, diamond distance for
//! qubit unitaries, Bloch-sphere grid bounds).

pub mod channel;
pub mod gates;
pub mod matrix;
pub mod norms;
pub mod observable;
pub mod state;

pub use channel::{Channel, ChannelError, ChannelKind};
pub use matrix::{ComplexMatrix, MatrixError};
pub use norms::NormError;
pub use observable::{expectation, Observable, ObservableError, Pauli, ALL_PAULIS};
pub use state::{DensityOperator, PureState, StateError};
