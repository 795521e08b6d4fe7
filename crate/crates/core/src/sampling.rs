//! Shot-based Pauli-expectation estimation and the calibration sweeps.
//!
//! Measurement model: the state-preparation channel runs with one
//! depolarizing layer per constituent gate, then the basis-change circuit
//! for the requested Pauli (H for X; S† then H for Y; nothing for Z), each
//! of those gates also followed by a depolarizing layer. The Z-outcome
//! distribution of the resulting state is computed analytically and `shots`
//! Bernoulli samples are drawn from it, with the readout flip folded into
//! the Bernoulli parameter — statistically identical to per-trajectory
//! Monte Carlo for depolarizing noise, and orders of magnitude faster.
//!
//! Determinism: every sweep cell derives its own [`SplitMix64`] stream from
//! `(seed, p-index, trial, input-index, pauli-index)`, so results are
//! bit-identical across runs and across thread schedules; cells are merged
//! by index, never by completion order.

use rayon::prelude::*;
use thiserror::Error;

use crate::contracts::{
    standard_inputs, worst_deviation, Contract, ContractError, ObservableFamily,
};
use crate::qcore::channel::{Channel, ChannelError, ChannelKind};
use crate::qcore::gates::ry;
use crate::qcore::matrix::MatrixError;
use crate::qcore::observable::{expectation, Observable, ObservableError, Pauli, ALL_PAULIS};
use crate::qcore::state::{DensityOperator, StateError};
use crate::rng::SplitMix64;

/// Errors from estimation and sweep configuration.
#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    /// Shots and trials must both be ≥ 1.
    #[error(
        "shot configuration needs shots ≥ 1 and trials ≥ 1, got shots {shots}, trials {trials}"
    )]
    BadShotConfig { shots: u32, trials: u32 },
    /// Noise probabilities must be finite and in [0, 1].
    #[error("noise probability {0} outside [0, 1]")]
    BadProbability(f64),
    /// `estimate_pauli` supports only the X, Y, Z observables.
    #[error("observable {0:?} is not a Pauli; only X, Y, Z can be estimated")]
    UnsupportedObservable(String),
    /// Estimation is single-qubit only.
    #[error("estimation requires single-qubit channels and states, got dimension {0}")]
    RequiresQubit(usize),
    /// Statistics need at least one sample.
    #[error("cannot aggregate an empty sample list")]
    EmptySamples,
    /// The calibration overlay needs both curves non-empty.
    #[error("calibration window requires non-empty noise and logic datasets")]
    EmptyDataset,
    /// Underlying channel failure.
    #[error(transparent)]
    Channel(#[from] ChannelError),
    /// Underlying state failure.
    #[error(transparent)]
    State(#[from] StateError),
    /// Underlying observable failure.
    #[error(transparent)]
    Observable(#[from] ObservableError),
    /// Underlying matrix failure.
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    /// Underlying contract failure.
    #[error(transparent)]
    Contract(#[from] ContractError),
}

/// Shot and trial counts plus the master seed for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotConfig {
    shots: u32,
    trials: u32,
    seed: u64,
}

impl ShotConfig {
    /// Build a configuration; both counts must be ≥ 1.
    pub fn new(shots: u32, trials: u32, seed: u64) -> Result<Self, SamplingError> {
        if shots == 0 || trials == 0 {
            return Err(SamplingError::BadShotConfig { shots, trials });
        }
        Ok(Self { shots, trials, seed })
    }

    /// Shots per measurement.
    pub fn shots(&self) -> u32 {
        self.shots
    }

    /// Independent trials per sweep cell.
    pub fn trials(&self) -> u32 {
        self.trials
    }

    /// Master seed all cell streams derive from.
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Synthetic noise model: depolarizing probability per single-qubit gate
/// plus a per-shot readout bit-flip probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    gate_p: f64,
    readout_flip: f64,
}

impl NoiseSpec {
    /// Build a noise spec; both probabilities must be finite and in [0, 1].
    pub fn new(gate_p: f64, readout_flip: f64) -> Result<Self, SamplingError> {
        for p in [gate_p, readout_flip] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(SamplingError::BadProbability(p));
            }
        }
        Ok(Self { gate_p, readout_flip })
    }

    /// No gate noise, no readout noise.
    pub fn noiseless() -> Self {
        Self { gate_p: 0.0, readout_flip: 0.0 }
    }

    /// Depolarizing probability applied after every single-qubit gate.
    pub fn gate_p(&self) -> f64 {
        self.gate_p
    }

    /// Probability each measured bit is flipped.
    pub fn readout_flip(&self) -> f64 {
        self.readout_flip
    }
}

/// Aggregate statistics of per-trial values.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    /// Arithmetic mean of the samples.
    pub mean: f64,
    /// Sample standard deviation (n−1 denominator; 0 for a single trial).
    pub std: f64,
    /// 95th percentile by the nearest-rank method (index ⌈0.95·n⌉, 1-based).
    pub p95: f64,
    /// The raw per-trial values, in trial order.
    pub samples: Vec<f64>,
}

impl TrialStats {
    /// Aggregate a non-empty sample list.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self, SamplingError> {
        if samples.is_empty() {
            return Err(SamplingError::EmptySamples);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = if samples.len() > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = samples.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let rank = (0.95 * n).ceil() as usize;
        let p95 = sorted[rank.max(1) - 1];
        Ok(Self { mean, std, p95, samples })
    }
}

/// Apply a channel with one depolarizing layer (probability `gate_p`) after
/// every constituent unitary gate; explicit depolarizing parts run as-is.
fn apply_with_gate_noise(
    ch: &Channel,
    rho: &DensityOperator,
    gate_p: f64,
) -> Result<DensityOperator, SamplingError> {
    match ch.kind() {
        ChannelKind::Unitary(_) => {
            let out = ch.apply(rho)?;
            Ok(Channel::depolarizing(gate_p, ch.dim())?.apply(&out)?)
        }
        ChannelKind::Depolarizing { .. } => Ok(ch.apply(rho)?),
        ChannelKind::Composition(parts) => {
            let mut state = rho.clone();
            for part in parts {
                state = apply_with_gate_noise(part, &state, gate_p)?;
            }
            Ok(state)
        }
    }
}

fn pauli_of(observable: &Observable) -> Result<Pauli, SamplingError> {
    for p in ALL_PAULIS {
        if observable.matrix().frobenius_distance(&p.matrix()).map_err(SamplingError::Matrix)?
            < 1e-12
        {
            return Ok(p);
        }
    }
    Err(SamplingError::UnsupportedObservable(observable.label().to_string()))
}

/// Analytic expectation of `pauli` after noisy preparation, noisy basis
/// change, and readout flip — the exact mean of [`estimate_pauli`].
pub fn noisy_pauli_expectation(
    state_prep: &Channel,
    input: &DensityOperator,
    pauli: &Observable,
    noise: &NoiseSpec,
) -> Result<f64, SamplingError> {
    if state_prep.dim() != 2 || input.dim() != 2 {
        return Err(SamplingError::RequiresQubit(state_prep.dim().max(input.dim())));
    }
    let which = pauli_of(pauli)?;
    let mut rho = apply_with_gate_noise(state_prep, input, noise.gate_p)?;
    for gate in which.basis_change_circuit() {
        let rotated = Channel::unitary(gate)?.apply(&rho)?;
        rho = Channel::depolarizing(noise.gate_p, 2)?.apply(&rotated)?;
    }
    let z = expectation(&Observable::pauli(Pauli::Z), &rho)?;
    Ok((1.0 - 2.0 * noise.readout_flip) * z)
}

/// Shot-based estimate of a Pauli expectation: prepares the noisy
/// Z-basis distribution analytically, draws `shots` Bernoulli samples from
/// it (readout flip folded into the Bernoulli parameter), and returns
/// `(n₀ − n₁) / shots`.
pub fn estimate_pauli(
    state_prep: &Channel,
    input: &DensityOperator,
    pauli: &Observable,
    noise: &NoiseSpec,
    cfg: &ShotConfig,
    rng: &mut SplitMix64,
) -> Result<f64, SamplingError> {
    let mean = noisy_pauli_expectation(state_prep, input, pauli, noise)?;
    let p0 = (1.0 + mean) / 2.0;
    let mut n0: u32 = 0;
    for _ in 0..cfg.shots {
        if rng.bernoulli(p0) {
            n0 += 1;
        }
    }
    let shots = f64::from(cfg.shots);
    Ok((2.0 * f64::from(n0) - shots) / shots)
}

/// Sweep depolarizing strength: for each `p` and each trial, take the worst
/// deviation over `{X, Y, Z} ×` the six standard inputs between the noisy
/// estimate of `b` and the noiseless analytic expectation of `a_ref`, then
/// aggregate the per-trial worsts into [`TrialStats`].
///
/// Cells are embarrassingly parallel; each derives its RNG stream from
/// `(seed, p-index, trial, input-index, pauli-index)` and results are
/// merged by index, so the output is deterministic for a fixed seed.
pub fn noise_sweep(
    b: &Channel,
    a_ref: &Channel,
    p_values: &[f64],
    cfg: &ShotConfig,
) -> Result<Vec<(f64, TrialStats)>, SamplingError> {
    for &p in p_values {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(SamplingError::BadProbability(p));
        }
    }
    let inputs = standard_inputs();
    let paulis: Vec<Observable> = ALL_PAULIS.map(Observable::pauli).to_vec();
    let mut references = Vec::with_capacity(inputs.len());
    for input in &inputs {
        let out = a_ref.apply(input)?;
        let mut per_pauli = Vec::with_capacity(paulis.len());
        for pauli in &paulis {
            per_pauli.push(expectation(pauli, &out)?);
        }
        references.push(per_pauli);
    }

    let trials = cfg.trials as usize;
    let worst_per_cell = |p_index: usize, trial: usize| -> Result<f64, SamplingError> {
        let noise = NoiseSpec::new(p_values[p_index], 0.0)?;
        let mut worst: f64 = 0.0;
        for (input_index, input) in inputs.iter().enumerate() {
            for (pauli_index, pauli) in paulis.iter().enumerate() {
                let mut stream = SplitMix64::stream(
                    cfg.seed,
                    &[p_index as u64, trial as u64, input_index as u64, pauli_index as u64],
                );
                let est = estimate_pauli(b, input, pauli, &noise, cfg, &mut stream)?;
                worst = worst.max((est - references[input_index][pauli_index]).abs());
            }
        }
        Ok(worst)
    };

    let cells: Vec<f64> = (0..p_values.len() * trials)
        .into_par_iter()
        .map(|cell| worst_per_cell(cell / trials, cell % trials))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(p_values.len());
    for (p_index, &p) in p_values.iter().enumerate() {
        let samples = cells[p_index * trials..(p_index + 1) * trials].to_vec();
        out.push((p, TrialStats::from_samples(samples)?));
    }
    Ok(out)
}

/// One row of the analytic rotation-angle sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPoint {
    /// Over-rotation angle δ in radians.
    pub delta: f64,
    /// Worst full-XYZ deviation of `R_y(θ+δ)` against `R_y(θ)` over the
    /// six standard inputs.
    pub full_dev: f64,
    /// Worst Z-only deviation over the same inputs.
    pub z_dev: f64,
}

/// Analytic over-rotation sweep: deviation of `R_y(θ+δ)` against `R_y(θ)`
/// under the full-XYZ and the weak-Z contracts, no sampling involved.
pub fn delta_sweep(theta: f64, delta_values: &[f64]) -> Result<Vec<DeltaPoint>, SamplingError> {
    let inputs = standard_inputs();
    let full = Contract::new(ObservableFamily::full_xyz(), 0.0, inputs.clone())?;
    let weak = Contract::new(ObservableFamily::weak_z(), 0.0, inputs)?;
    let reference = Channel::unitary(ry(theta)?)?;
    let mut out = Vec::with_capacity(delta_values.len());
    for &delta in delta_values {
        let candidate = Channel::unitary(ry(theta + delta)?)?;
        let full_dev = worst_deviation(&reference, &candidate, &full)?.worst;
        let z_dev = worst_deviation(&reference, &candidate, &weak)?.worst;
        out.push(DeltaPoint { delta, full_dev, z_dev });
    }
    Ok(out)
}

/// Which curve a calibration-overlay row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSeries {
    /// Shot/hardware noise floor: x is the depolarizing probability p, the
    /// value is the p95 of the honest worst-case deviation.
    NoiseFloor,
    /// Logical perturbation curve: x is the over-rotation δ, the value is
    /// the analytic full-XYZ deviation.
    LogicDeviation,
}

impl WindowSeries {
    /// Stable serialization label.
    pub fn label(&self) -> &'static str {
        match self {
            WindowSeries::NoiseFloor => "noise-floor",
            WindowSeries::LogicDeviation => "logic-deviation",
        }
    }
}

/// One row of the combined noise-floor / logic-deviation overlay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRow {
    /// Curve the row belongs to.
    pub series: WindowSeries,
    /// Abscissa: p for the noise floor, δ for the logic curve.
    pub x: f64,
    /// Ordinate: p95 deviation or analytic deviation respectively.
    pub value: f64,
}

/// Build the calibration-window overlay: one row per noise point
/// `(p, p95)` followed by one row per logic point `(δ, full_dev)`. Pure
/// data transformation; row count is `|noise| + |logic|`.
pub fn calibration_window(
    noise_stats: &[(f64, TrialStats)],
    logic_curve: &[(f64, f64)],
) -> Result<Vec<WindowRow>, SamplingError> {
    if noise_stats.is_empty() || logic_curve.is_empty() {
        return Err(SamplingError::EmptyDataset);
    }
    let mut rows = Vec::with_capacity(noise_stats.len() + logic_curve.len());
    for (p, stats) in noise_stats {
        rows.push(WindowRow { series: WindowSeries::NoiseFloor, x: *p, value: stats.p95 });
    }
    for (delta, dev) in logic_curve {
        rows.push(WindowRow { series: WindowSeries::LogicDeviation, x: *delta, value: *dev });
    }
    Ok(rows)
}

/// The workable tolerance interval above a noise floor and below a logical
/// deviation to detect: `Some((floor, deviation))` when the gap is
/// non-empty, `None` when the floor swallows the signal.
pub fn tolerance_window(noise_p95: f64, logic_dev: f64) -> Option<(f64, f64)> {
    if noise_p95 < logic_dev {
        Some((noise_p95, logic_dev))
    } else {
        None
    }
}
