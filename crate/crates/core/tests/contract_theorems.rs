//! The three contract guarantees and the sneaky-override fingerprint,
//! exercised as numerical properties over seeded Haar-random unitary
//! configurations rather than symbolic proofs.

use qcivet_core::contracts::{
    completeness_bound, composition_bound, make_sneaky, pauli_deviation_supremum, soundness_margin,
    standard_inputs, worst_deviation, Contract, ObservableFamily,
};
use qcivet_core::qcore::gates::{haar_random, ry};
use qcivet_core::qcore::{Channel, ComplexMatrix, Observable, Pauli};
use qcivet_core::rng::SplitMix64;

const CONFIGS: u64 = 100;
const SLACK: f64 = 1e-9;

fn random_unitary(seed: u64, which: u64) -> ComplexMatrix {
    haar_random(&mut SplitMix64::stream(seed, &[which]))
}

/// Observable deviations never exceed the spectrum bound times the diamond
/// distance, over 100 random unitary pairs.
#[test]
fn soundness_holds_over_100_random_configurations() {
    let family = ObservableFamily::full_xyz();
    let inputs = standard_inputs();
    let mut violations = 0;
    for seed in 0..CONFIGS {
        let a = Channel::unitary(random_unitary(seed, 0)).unwrap();
        let b = Channel::unitary(random_unitary(seed, 1)).unwrap();
        let (lhs, rhs) = soundness_margin(&a, &b, &family, &inputs).unwrap();
        if lhs > rhs + SLACK {
            violations += 1;
            eprintln!("seed {seed}: lhs {lhs} > rhs {rhs}");
        }
    }
    assert_eq!(violations, 0);
}

/// The diamond distance never exceeds 2√2 times the worst full-XYZ
/// deviation over the Pauli eigenstates, over 100 random unitary pairs.
#[test]
fn completeness_holds_over_100_random_configurations() {
    let mut violations = 0;
    for seed in 0..CONFIGS {
        let a = Channel::unitary(random_unitary(seed, 2)).unwrap();
        let b = Channel::unitary(random_unitary(seed, 3)).unwrap();
        let (diamond, bound) = completeness_bound(&a, &b).unwrap();
        if diamond > bound + SLACK {
            violations += 1;
            eprintln!("seed {seed}: diamond {diamond} > bound {bound}");
        }
    }
    assert_eq!(violations, 0);
}

/// Chained deviation stays within ε₂ + K₂√2·ε₁ when each stage honors its
/// own contract with ε taken as the all-state deviation supremum, over 100
/// random two-stage configurations.
#[test]
fn compositionality_holds_over_100_random_configurations() {
    let family = ObservableFamily::full_xyz();
    let mut violations = 0;
    for seed in 0..CONFIGS {
        let a1 = random_unitary(seed, 4);
        let b1 = random_unitary(seed, 5);
        let a2 = random_unitary(seed, 6);
        let b2 = random_unitary(seed, 7);
        let eps1 = pauli_deviation_supremum(&a1, &b1).unwrap();
        let eps2 = pauli_deviation_supremum(&a2, &b2).unwrap();
        let (lhs, rhs) = composition_bound(
            &Channel::unitary(a1).unwrap(),
            &Channel::unitary(b1).unwrap(),
            &Channel::unitary(a2).unwrap(),
            &Channel::unitary(b2).unwrap(),
            &family,
            &family,
            eps1,
            eps2,
        )
        .unwrap();
        if lhs > rhs + SLACK {
            violations += 1;
            eprintln!("seed {seed}: lhs {lhs} > rhs {rhs}");
        }
    }
    assert_eq!(violations, 0);
}

fn assert_sneaky_fingerprint(theta: f64) {
    let a = Channel::unitary(ry(theta).unwrap()).unwrap();
    let sneaky = make_sneaky(&a, &Observable::pauli(Pauli::Z)).unwrap();
    let inputs = standard_inputs();

    let weak = Contract::new(ObservableFamily::weak_z(), 0.0, inputs.clone()).unwrap();
    let weak_report = worst_deviation(&a, &sneaky, &weak).unwrap();
    assert!(
        weak_report.worst <= 1e-9,
        "θ = {theta}: Z-only deviation {} should be invisible",
        weak_report.worst
    );
    for cell in &weak_report.per_cell {
        assert!(cell.deviation <= 1e-9, "θ = {theta}: cell {cell:?}");
    }

    let full = Contract::new(ObservableFamily::full_xyz(), 0.0, inputs).unwrap();
    let full_report = worst_deviation(&a, &sneaky, &full).unwrap();
    assert!(
        full_report.worst >= 1.0,
        "θ = {theta}: full-XYZ deviation {} should be macroscopic",
        full_report.worst
    );
}

/// The sneaky override is invisible to the Z-only contract on every input
/// yet separated by ≥ 1.0 under full XYZ — at the reference angle and at
/// 20 random angles.
#[test]
fn sneaky_fingerprint_at_the_reference_and_20_random_angles() {
    assert_sneaky_fingerprint(0.4 * std::f64::consts::PI);
    let mut rng = SplitMix64::stream(2718, &[0]);
    for _ in 0..20 {
        assert_sneaky_fingerprint(rng.uniform(0.3, 2.8));
    }
}
