//! Observable-deviation contracts and their separation guarantees.
//!
//! A contract fixes an observable family, a tolerance ε and an input-state
//! set; a candidate channel satisfies it when every expectation value stays
//! within ε of the reference channel's on every input. This module provides
//! the deviation evaluator, the informational-completeness test, the
//! counterfeit ("sneaky") channel construction that defeats a Z-only
//! contract, and the three bound checkers — soundness, completeness and
//! composition — that the property suites sweep over random channels.
//!
//! All deviations here are analytic (density-operator arithmetic, no
//! sampling); finite-shot estimation lives in [`crate::sampling`].

use thiserror::Error;

use crate::qcore::channel::{Channel, ChannelError};
use crate::qcore::gates::{ry, rz, s_gate};
use crate::qcore::matrix::{ComplexMatrix, MatrixError};
use crate::qcore::norms::{bloch_rotation, diamond_distance_unitary, operator_norm, NormError};
use crate::qcore::observable::{expectation, Observable, ObservableError, Pauli, ALL_PAULIS};
use crate::qcore::state::{DensityOperator, PureState, StateError};

/// Norming constant of the single-qubit Pauli family: for traceless
/// Hermitian σ, `‖σ‖₁ ≤ √2 · max_{P∈{X,Y,Z}} |Tr(Pσ)|`.
pub const PAULI_NORMING_CONSTANT: f64 = std::f64::consts::SQRT_2;

/// Completeness constant for the Pauli family: the diamond distance between
/// two qubit channels is at most `2√2` times their worst Pauli deviation
/// over the Pauli eigenstates.
pub const COMPLETENESS_CONSTANT: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Errors from contract construction and bound evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ContractError {
    /// An observable family must contain at least one observable.
    #[error("observable family {0:?} is empty")]
    EmptyFamily(String),
    /// All observables in a family must share one dimension.
    #[error("observable family mixes dimensions {0} and {1}")]
    MixedDims(usize, usize),
    /// The family's spectrum bound K must be strictly positive.
    #[error("observable family {0:?} has zero spectrum bound")]
    ZeroSpectrumBound(String),
    /// Contract tolerance must be finite and ≥ 0.
    #[error("contract tolerance {0} must be finite and non-negative")]
    BadTolerance(f64),
    /// A contract needs at least one input state.
    #[error("contract input set is empty")]
    EmptyInputs,
    /// Channel/contract dimensions disagree.
    #[error("dimension mismatch: channel {0}, contract {1}")]
    DimMismatch(usize, usize),
    /// The sneaky construction only supports the Z witness.
    #[error("sneaky construction supports only the Z observable, got {0:?}")]
    UnsupportedWitness(String),
    /// Bound checkers need unitary channels for the exact diamond distance.
    #[error("bound requires unitary channels (no noise parts)")]
    RequiresUnitary,
    /// The composition theorem's per-stage hypothesis failed.
    #[error("stage {stage} deviation {measured} exceeds its declared tolerance {declared}")]
    HypothesisViolated { stage: usize, measured: f64, declared: f64 },
    /// Underlying channel failure.
    #[error(transparent)]
    Channel(#[from] ChannelError),
    /// Underlying observable failure.
    #[error(transparent)]
    Observable(#[from] ObservableError),
    /// Underlying norm failure.
    #[error(transparent)]
    Norm(#[from] NormError),
    /// Underlying state failure.
    #[error(transparent)]
    State(#[from] StateError),
    /// Underlying matrix failure.
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

// ---------------------------------------------------------------------------
// Families, contracts, reports
// ---------------------------------------------------------------------------

/// A named, non-empty set of same-dimension observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableFamily {
    name: String,
    observables: Vec<Observable>,
    spectrum_bound: f64,
}

impl ObservableFamily {
    /// Build a family; rejects empty sets, mixed dimensions, and zero
    /// spectrum bound.
    pub fn new(
        name: impl Into<String>,
        observables: Vec<Observable>,
    ) -> Result<Self, ContractError> {
        let name = name.into();
        let first_dim = match observables.first() {
            Some(o) => o.dim(),
            None => return Err(ContractError::EmptyFamily(name)),
        };
        let mut spectrum_bound: f64 = 0.0;
        for o in &observables {
            if o.dim() != first_dim {
                return Err(ContractError::MixedDims(first_dim, o.dim()));
            }
            spectrum_bound = spectrum_bound.max(operator_norm(o.matrix())?);
        }
        if spectrum_bound <= 0.0 {
            return Err(ContractError::ZeroSpectrumBound(name));
        }
        Ok(Self { name, observables, spectrum_bound })
    }

    /// The informationally complete single-qubit family {X, Y, Z}.
    pub fn full_xyz() -> Self {
        Self::new("full-XYZ", ALL_PAULIS.map(Observable::pauli).to_vec())
            .expect("Pauli family is well-formed")
    }

    /// The weak single-observable family {Z}.
    pub fn weak_z() -> Self {
        Self::new("weak-Z", vec![Observable::pauli(Pauli::Z)]).expect("Z family is well-formed")
    }

    /// Family name (e.g. "full-XYZ", "weak-Z").
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The observables, in declaration order.
    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    /// Common dimension of the family.
    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    /// Spectrum bound `K = max over the family of the operator norm`.
    pub fn spectrum_bound(&self) -> f64 {
        self.spectrum_bound
    }

    /// Whether the real span of `{I} ∪ family` is all Hermitian matrices.
    ///
    /// Computed as the real rank of the vectorised set via modified
    /// Gram-Schmidt; the span must reach dimension d².
    pub fn is_informationally_complete(&self) -> bool {
        let d = self.dim();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let identity = ComplexMatrix::identity(d).expect("valid dim");
        let mut candidates: Vec<&ComplexMatrix> = vec![&identity];
        candidates.extend(self.observables.iter().map(|o| o.matrix()));
        for m in candidates {
            let mut v: Vec<f64> = m.entries().iter().flat_map(|z| [z.re, z.im]).collect();
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-9 {
                for x in &mut v {
                    *x /= norm;
                }
                basis.push(v);
            }
        }
        basis.len() == d * d
    }
}

/// A subtype obligation: stay within `tolerance` of the reference channel's
/// expectation values for every (input, observable) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    family: ObservableFamily,
    tolerance: f64,
    inputs: Vec<DensityOperator>,
}

impl Contract {
    /// Build a contract; tolerance must be finite ≥ 0, inputs non-empty and
    /// of the family's dimension.
    pub fn new(
        family: ObservableFamily,
        tolerance: f64,
        inputs: Vec<DensityOperator>,
    ) -> Result<Self, ContractError> {
        if !tolerance.is_finite() || tolerance < 0.0 {
            return Err(ContractError::BadTolerance(tolerance));
        }
        if inputs.is_empty() {
            return Err(ContractError::EmptyInputs);
        }
        for rho in &inputs {
            if rho.dim() != family.dim() {
                return Err(ContractError::DimMismatch(rho.dim(), family.dim()));
            }
        }
        Ok(Self { family, tolerance, inputs })
    }

    /// The observable family.
    pub fn family(&self) -> &ObservableFamily {
        &self.family
    }

    /// The tolerance ε.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// The input-state set.
    pub fn inputs(&self) -> &[DensityOperator] {
        &self.inputs
    }
}

/// One (input, observable) deviation entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationCell {
    /// Index into the contract's input list.
    pub input_index: usize,
    /// Label of the observable.
    pub observable_label: String,
    /// `|Tr(O ℰ_B(ρ)) − Tr(O ℰ_A(ρ))|`.
    pub deviation: f64,
}

/// The full deviation table for a candidate against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    /// Largest deviation over all cells.
    pub worst: f64,
    /// Per-(input, observable) deviations, inputs outer, observables inner.
    pub per_cell: Vec<DeviationCell>,
    /// Whether `worst ≤ tolerance`.
    pub passed: bool,
}

/// The six standard single-qubit input states used throughout: the four
/// Pauli eigenstates |0⟩, |1⟩, |+⟩, |−⟩ plus two off-axis states
/// `R_z(1.3) R_y(0.7)|0⟩` and `R_z(0.4) R_y(2.1)|0⟩`, chosen so that no
/// Pauli expectation of the reference channel is accidentally zero.
pub fn standard_inputs() -> Vec<DensityOperator> {
    let mut states = pauli_eigenstate_inputs();
    let zero = PureState::basis(2, 0).expect("basis state");
    for (alpha, beta) in [(1.3, 0.7), (0.4, 2.1)] {
        let u =
            rz(alpha).expect("finite angle").mul(&ry(beta).expect("finite angle")).expect("2x2");
        states.push(zero.evolve(&u).expect("unitary evolution").density());
    }
    states
}

/// The four Pauli eigenstates |0⟩, |1⟩, |+⟩, |−⟩.
pub fn pauli_eigenstate_inputs() -> Vec<DensityOperator> {
    let zero = PureState::basis(2, 0).expect("basis state");
    let one = PureState::basis(2, 1).expect("basis state");
    let h = crate::qcore::gates::hadamard();
    let plus = zero.evolve(&h).expect("unitary evolution");
    let minus = one.evolve(&h).expect("unitary evolution");
    vec![zero.density(), one.density(), plus.density(), minus.density()]
}

/// Worst-case observable deviation of candidate `b` against reference `a`
/// under a contract (Definition-1 check).
pub fn worst_deviation(
    a: &Channel,
    b: &Channel,
    contract: &Contract,
) -> Result<DeviationReport, ContractError> {
    if a.dim() != contract.family.dim() {
        return Err(ContractError::DimMismatch(a.dim(), contract.family.dim()));
    }
    if b.dim() != contract.family.dim() {
        return Err(ContractError::DimMismatch(b.dim(), contract.family.dim()));
    }
    let mut per_cell =
        Vec::with_capacity(contract.inputs.len() * contract.family.observables.len());
    let mut worst: f64 = 0.0;
    for (input_index, rho) in contract.inputs.iter().enumerate() {
        let out_a = a.apply(rho)?;
        let out_b = b.apply(rho)?;
        for obs in &contract.family.observables {
            let deviation = (expectation(obs, &out_b)? - expectation(obs, &out_a)?).abs();
            worst = worst.max(deviation);
            per_cell.push(DeviationCell {
                input_index,
                observable_label: obs.label().to_string(),
                deviation,
            });
        }
    }
    Ok(DeviationReport { worst, per_cell, passed: worst <= contract.tolerance })
}

// ---------------------------------------------------------------------------
// Sneaky construction
// ---------------------------------------------------------------------------

/// Build the counterfeit channel that defeats a Z-only contract: apply `a`,
/// then conjugate by the phase gate S.
///
/// Because `S†ZS = Z`, the output has identical ⟨Z⟩ to `a` on **every**
/// input, while ⟨X⟩ and ⟨Y⟩ are swapped (with a sign) and so deviate
/// maximally unless `a` maps everything onto the Z axis. Only the Z witness
/// is supported; other observables error.
pub fn make_sneaky(a: &Channel, weak_obs: &Observable) -> Result<Channel, ContractError> {
    if weak_obs.matrix().frobenius_distance(&Pauli::Z.matrix())? > 1e-12 {
        return Err(ContractError::UnsupportedWitness(weak_obs.label().to_string()));
    }
    Ok(Channel::composition(vec![a.clone(), Channel::unitary(s_gate())?])?)
}

// ---------------------------------------------------------------------------
// Bound checkers
// ---------------------------------------------------------------------------

fn unitary_of(ch: &Channel) -> Result<ComplexMatrix, ContractError> {
    ch.as_single_unitary().ok_or(ContractError::RequiresUnitary)
}

/// Soundness check: observable deviation never exceeds `K · diamond`.
///
/// Returns `(lhs, rhs)` with `lhs` the worst deviation of `b` vs `a` over
/// `inputs × family` and `rhs = K · d_⋄(a, b)`; the guarantee is
/// `lhs ≤ rhs` (up to 1e-9 arithmetic slack). Requires noiseless channels so
/// the diamond distance is exact.
pub fn soundness_margin(
    a: &Channel,
    b: &Channel,
    family: &ObservableFamily,
    inputs: &[DensityOperator],
) -> Result<(f64, f64), ContractError> {
    let ua = unitary_of(a)?;
    let ub = unitary_of(b)?;
    let contract = Contract::new(family.clone(), 0.0, inputs.to_vec())?;
    let lhs = worst_deviation(a, b, &contract)?.worst;
    let rhs = family.spectrum_bound() * diamond_distance_unitary(&ua, &ub)?;
    Ok((lhs, rhs))
}

/// Completeness check: the diamond distance is controlled by the Pauli
/// deviation on the Pauli eigenstates.
///
/// Returns `(diamond, bound)` with
/// `bound = 2√2 · worst {X,Y,Z} deviation over {|0⟩, |1⟩, |+⟩, |−⟩}`; the
/// guarantee is `diamond ≤ bound` (up to 1e-9). Requires noiseless channels.
pub fn completeness_bound(a: &Channel, b: &Channel) -> Result<(f64, f64), ContractError> {
    let ua = unitary_of(a)?;
    let ub = unitary_of(b)?;
    let diamond = diamond_distance_unitary(&ua, &ub)?;
    let contract = Contract::new(ObservableFamily::full_xyz(), 0.0, pauli_eigenstate_inputs())?;
    let deviation = worst_deviation(a, b, &contract)?.worst;
    Ok((diamond, COMPLETENESS_CONSTANT * deviation))
}

/// Supremum over **all** input states of the Pauli deviation between two
/// qubit unitaries: `max_P ‖row_P(R_u − R_v)‖₂` with `R` the Bloch rotation.
///
/// For a pure state with Bloch vector n, the P-deviation is
/// `|row_P(R_u − R_v) · n|`, maximised at the unit vector along the row.
/// This is the tightest tolerance a stage can honestly declare, and the
/// composition theorem's per-stage hypothesis is stated against it.
pub fn pauli_deviation_supremum(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<f64, ContractError> {
    let ru = bloch_rotation(u)?;
    let rv = bloch_rotation(v)?;
    let mut sup: f64 = 0.0;
    for p in 0..3 {
        let row_norm: f64 = (0..3).map(|q| (ru[p][q] - rv[p][q]).powi(2)).sum::<f64>().sqrt();
        sup = sup.max(row_norm);
    }
    Ok(sup)
}

/// Composition check: contract error accumulates at most linearly through a
/// two-stage chain.
///
/// Verifies the per-stage hypotheses `dev(a₁,b₁) ≤ ε₁` and
/// `dev(a₂,b₂) ≤ ε₂` on the standard input set (erroring if either fails),
/// then returns `(lhs, rhs)` where `lhs` is the worst `fam2` deviation of
/// `b₂∘b₁` vs `a₂∘a₁` on the same inputs and `rhs = ε₂ + K₂·√2·ε₁`. The
/// guarantee `lhs ≤ rhs` holds when ε₁ bounds the stage-1 deviation over all
/// states (e.g. via [`pauli_deviation_supremum`]), not merely the sampled
/// input set — intermediate states after stage 1 leave the input set.
#[allow(clippy::too_many_arguments)]
pub fn composition_bound(
    a1: &Channel,
    b1: &Channel,
    a2: &Channel,
    b2: &Channel,
    fam1: &ObservableFamily,
    fam2: &ObservableFamily,
    eps1: f64,
    eps2: f64,
) -> Result<(f64, f64), ContractError> {
    let inputs = standard_inputs();
    let dev1 = worst_deviation(a1, b1, &Contract::new(fam1.clone(), 0.0, inputs.clone())?)?.worst;
    if dev1 > eps1 + 1e-12 {
        return Err(ContractError::HypothesisViolated { stage: 1, measured: dev1, declared: eps1 });
    }
    let dev2 = worst_deviation(a2, b2, &Contract::new(fam2.clone(), 0.0, inputs.clone())?)?.worst;
    if dev2 > eps2 + 1e-12 {
        return Err(ContractError::HypothesisViolated { stage: 2, measured: dev2, declared: eps2 });
    }
    let chain_a = Channel::composition(vec![a1.clone(), a2.clone()])?;
    let chain_b = Channel::composition(vec![b1.clone(), b2.clone()])?;
    let lhs =
        worst_deviation(&chain_a, &chain_b, &Contract::new(fam2.clone(), 0.0, inputs)?)?.worst;
    let rhs = eps2 + fam2.spectrum_bound() * PAULI_NORMING_CONSTANT * eps1;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::gates::{hadamard, rx, s_dagger};
    use approx::assert_abs_diff_eq;

    const THETA: f64 = 0.4 * std::f64::consts::PI;

    fn ry_channel(theta: f64) -> Channel {
        Channel::unitary(ry(theta).unwrap()).unwrap()
    }

    fn good_candidate(theta: f64) -> Channel {
        // S R_x(θ) S† conjugation, equal to R_y(θ) conjugation.
        Channel::composition(vec![
            Channel::unitary(s_dagger()).unwrap(),
            Channel::unitary(rx(theta).unwrap()).unwrap(),
            Channel::unitary(s_gate()).unwrap(),
        ])
        .unwrap()
    }

    fn full_contract(tol: f64) -> Contract {
        Contract::new(ObservableFamily::full_xyz(), tol, standard_inputs()).unwrap()
    }

    fn weak_contract(tol: f64) -> Contract {
        Contract::new(ObservableFamily::weak_z(), tol, standard_inputs()).unwrap()
    }

    #[test]
    fn family_construction_validates() {
        assert!(matches!(
            ObservableFamily::new("empty", vec![]),
            Err(ContractError::EmptyFamily(_))
        ));
        let zero = Observable::new("0", ComplexMatrix::zeros(2).unwrap()).unwrap();
        assert!(matches!(
            ObservableFamily::new("null", vec![zero]),
            Err(ContractError::ZeroSpectrumBound(_))
        ));
        assert_abs_diff_eq!(ObservableFamily::full_xyz().spectrum_bound(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn good_candidate_deviates_nowhere() {
        let a = ry_channel(THETA);
        let b = good_candidate(THETA);
        let report = worst_deviation(&a, &b, &full_contract(1e-9)).unwrap();
        assert!(report.worst <= 1e-9, "worst = {}", report.worst);
        assert!(report.passed);
        assert_eq!(report.per_cell.len(), 18);
    }

    #[test]
    fn over_rotation_deviates_under_both_contracts() {
        let a = ry_channel(THETA);
        let b = ry_channel(THETA + 0.4);
        let full = worst_deviation(&a, &b, &full_contract(0.0)).unwrap();
        let weak = worst_deviation(&a, &b, &weak_contract(0.0)).unwrap();
        assert_abs_diff_eq!(full.worst, 0.394752346, epsilon = 5e-9);
        assert_abs_diff_eq!(weak.worst, 0.394752346, epsilon = 5e-9);
        assert!(!full.passed);
    }

    #[test]
    fn sneaky_passes_weak_and_fails_full() {
        let a = ry_channel(THETA);
        let sneaky = make_sneaky(&a, &Observable::pauli(Pauli::Z)).unwrap();
        let weak = worst_deviation(&a, &sneaky, &weak_contract(1e-9)).unwrap();
        assert!(weak.worst <= 1e-9, "Z deviation = {}", weak.worst);
        assert!(weak.passed);
        let full = worst_deviation(&a, &sneaky, &full_contract(0.0)).unwrap();
        assert_abs_diff_eq!(full.worst, 1.401401491, epsilon = 5e-9);
    }

    #[test]
    fn sneaky_of_identity_fixes_zero_state() {
        let id = Channel::identity(2).unwrap();
        let sneaky = make_sneaky(&id, &Observable::pauli(Pauli::Z)).unwrap();
        let zero = DensityOperator::basis_state(2, 0).unwrap();
        let out = sneaky.apply(&zero).unwrap();
        assert!(out.matrix().frobenius_distance(zero.matrix()).unwrap() < 1e-14);
    }

    #[test]
    fn sneaky_rejects_non_z_witness() {
        let a = ry_channel(THETA);
        assert!(matches!(
            make_sneaky(&a, &Observable::pauli(Pauli::X)),
            Err(ContractError::UnsupportedWitness(_))
        ));
    }

    #[test]
    fn informational_completeness_of_pauli_families() {
        assert!(ObservableFamily::full_xyz().is_informationally_complete());
        assert!(!ObservableFamily::weak_z().is_informationally_complete());
        // Duplicates do not reduce the span.
        let with_dup = ObservableFamily::new(
            "xyzx",
            vec![
                Observable::pauli(Pauli::X),
                Observable::pauli(Pauli::Y),
                Observable::pauli(Pauli::Z),
                Observable::pauli(Pauli::X),
            ],
        )
        .unwrap();
        assert!(with_dup.is_informationally_complete());
        let xy = ObservableFamily::new(
            "xy",
            vec![Observable::pauli(Pauli::X), Observable::pauli(Pauli::Y)],
        )
        .unwrap();
        assert!(!xy.is_informationally_complete());
    }

    #[test]
    fn soundness_margin_example_values() {
        let a = ry_channel(THETA);
        let b = ry_channel(THETA + 0.4);
        let (lhs, rhs) =
            soundness_margin(&a, &b, &ObservableFamily::full_xyz(), &standard_inputs()).unwrap();
        assert_abs_diff_eq!(lhs, 0.394752346, epsilon = 5e-9);
        assert_abs_diff_eq!(rhs, 0.397338662, epsilon = 5e-9);
        assert!(lhs <= rhs + 1e-9);

        let (l0, r0) =
            soundness_margin(&a, &a, &ObservableFamily::full_xyz(), &standard_inputs()).unwrap();
        assert!(l0 <= 1e-12 && r0 <= 1e-12);
    }

    #[test]
    fn soundness_rejects_noisy_channels() {
        let a = ry_channel(THETA);
        let noisy = Channel::depolarizing(0.1, 2).unwrap();
        assert!(matches!(
            soundness_margin(&a, &noisy, &ObservableFamily::full_xyz(), &standard_inputs()),
            Err(ContractError::RequiresUnitary)
        ));
    }

    #[test]
    fn completeness_bound_example_values() {
        let a = ry_channel(THETA);
        let b = ry_channel(THETA + 0.4);
        let (diamond, bound) = completeness_bound(&a, &b).unwrap();
        assert_abs_diff_eq!(diamond, 0.397338662, epsilon = 5e-9);
        // Worst Pauli-eigenstate deviation at δ = 0.4 is ≈ 0.3948 ≥ 0.389.
        assert!(bound >= COMPLETENESS_CONSTANT * 0.389);
        assert!(diamond <= bound + 1e-9);

        let (d0, b0) = completeness_bound(&a, &a).unwrap();
        assert!(d0 <= 1e-7 && b0 <= 1e-9);
    }

    #[test]
    fn empirical_constant_probe_at_reference_point() {
        // diamond / observable-deviation at δ = 0.4 — the two-decimal ratio
        // 0.397/0.395 ≈ 1.005; exact arithmetic gives 1.00655.
        let a = ry_channel(THETA);
        let b = ry_channel(THETA + 0.4);
        let (lhs, rhs) =
            soundness_margin(&a, &b, &ObservableFamily::full_xyz(), &standard_inputs()).unwrap();
        let ratio = rhs / lhs;
        assert_abs_diff_eq!(ratio, 1.006551741, epsilon = 5e-9);
        assert!((ratio - 0.397 / 0.395).abs() < 0.02);
    }

    #[test]
    fn composition_bound_holds_for_over_rotation_chain() {
        let a = ry_channel(THETA);
        let b = ry_channel(THETA + 0.05);
        let fam = ObservableFamily::full_xyz();
        // Declare the all-state supremum as each stage's tolerance.
        let eps =
            pauli_deviation_supremum(&ry(THETA).unwrap(), &ry(THETA + 0.05).unwrap()).unwrap();
        let (lhs, rhs) = composition_bound(&a, &b, &a, &b, &fam, &fam, eps, eps).unwrap();
        assert!(lhs <= rhs + 1e-9, "lhs {lhs} > rhs {rhs}");

        let (l0, r0) = composition_bound(&a, &a, &a, &a, &fam, &fam, 0.0, 0.0).unwrap();
        assert!(l0 <= 1e-12 && r0 >= 0.0);
    }

    #[test]
    fn composition_bound_rejects_false_hypothesis() {
        let a = ry_channel(THETA);
        let b = ry_channel(THETA + 0.4);
        let fam = ObservableFamily::full_xyz();
        assert!(matches!(
            composition_bound(&a, &b, &a, &a, &fam, &fam, 0.01, 0.0),
            Err(ContractError::HypothesisViolated { stage: 1, .. })
        ));
    }

    #[test]
    fn pauli_deviation_supremum_dominates_input_set_deviation() {
        let u = ry(THETA).unwrap();
        let v = ry(THETA + 0.4).unwrap();
        let sup = pauli_deviation_supremum(&u, &v).unwrap();
        let report = worst_deviation(
            &Channel::unitary(u).unwrap(),
            &Channel::unitary(v).unwrap(),
            &full_contract(0.0),
        )
        .unwrap();
        assert!(sup >= report.worst - 1e-12);
        // For rotations the supremum equals 2 sin(δ/2) (a full Bloch row).
        assert_abs_diff_eq!(sup, 2.0 * (0.2_f64).sin(), epsilon = 1e-12);
    }

    #[test]
    fn worst_deviation_is_symmetric_and_definite() {
        let a = ry_channel(0.3);
        let b = ry_channel(1.1);
        let ab = worst_deviation(&a, &b, &full_contract(0.0)).unwrap();
        let ba = worst_deviation(&b, &a, &full_contract(0.0)).unwrap();
        assert_abs_diff_eq!(ab.worst, ba.worst, epsilon = 1e-14);
        let aa = worst_deviation(&a, &a, &full_contract(0.0)).unwrap();
        assert!(aa.per_cell.iter().all(|c| c.deviation == 0.0));
        assert_eq!(aa.worst, 0.0);
    }

    #[test]
    fn passed_is_monotone_in_tolerance() {
        let a = ry_channel(THETA);
        let b = ry_channel(THETA + 0.1);
        let dev = worst_deviation(&a, &b, &full_contract(0.0)).unwrap().worst;
        for (tol, expect) in [(dev * 0.99, false), (dev, true), (dev * 1.01, true)] {
            let report = worst_deviation(&a, &b, &full_contract(tol)).unwrap();
            assert_eq!(report.passed, expect, "tolerance {tol}");
        }
    }

    #[test]
    fn contract_construction_validates() {
        assert!(matches!(
            Contract::new(ObservableFamily::full_xyz(), -0.1, standard_inputs()),
            Err(ContractError::BadTolerance(_))
        ));
        assert!(matches!(
            Contract::new(ObservableFamily::full_xyz(), 0.1, vec![]),
            Err(ContractError::EmptyInputs)
        ));
        assert!(matches!(
            Contract::new(
                ObservableFamily::full_xyz(),
                0.1,
                vec![DensityOperator::maximally_mixed(4).unwrap()]
            ),
            Err(ContractError::DimMismatch(4, 2))
        ));
    }

    #[test]
    fn hadamard_mismatch_is_visible_to_all_paulis() {
        // Sanity: a structurally different unitary fails the full contract.
        let a = ry_channel(THETA);
        let b = Channel::unitary(hadamard()).unwrap();
        let report = worst_deviation(&a, &b, &full_contract(0.5)).unwrap();
        assert!(report.worst > 0.5);
        assert!(!report.passed);
    }
}
