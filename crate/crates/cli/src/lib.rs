//! Command implementations behind the `qcivet` binary: each experiment,
//! demo, and the latency benchmark, writing machine-readable CSV/JSON
//! artifacts plus a canonical run manifest.
//!
//! Every command is deterministic in `--seed`: identical flags and seed
//! produce byte-identical outputs. Floats in CSVs are rendered with
//! `{:.8e}` so files are stable across platforms. The manifest written
//! alongside each command's outputs lists the command, seed, effective
//! parameters, and every artifact the run produced (sorted, relative to
//! the output directory, excluding the manifest itself).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qcivet_core::auditchain::{
    canonicalize, scenario, ChainScenario, ChainVerification, SpecValue, StageSpec,
};
use qcivet_core::contracts::{
    make_sneaky, standard_inputs, worst_deviation, Contract, ObservableFamily,
};
use qcivet_core::engine::{bench_commit, BenchStats, IntegrityViolation, ViolationKind};
use qcivet_core::pipelines::{run_demo, Domain, PipelineTemplate, Scenario};
use qcivet_core::qcore::gates::ry;
use qcivet_core::qcore::{Channel, DensityOperator, Observable, Pauli};
use qcivet_core::rng::SplitMix64;
use qcivet_core::sampling::{calibration_window, delta_sweep, noise_sweep, ShotConfig, TrialStats};

/// Default RNG seed.
pub const DEFAULT_SEED: u64 = 42;
/// Default shots per estimate.
pub const DEFAULT_SHOTS: u32 = 4096;
/// Default trials per sweep point.
pub const DEFAULT_TRIALS: u32 = 20;
/// Default rotation angle θ = 2π/5.
pub const DEFAULT_THETA: f64 = 2.0 * std::f64::consts::PI / 5.0;
/// Default depolarizing sweep points.
pub const DEFAULT_P_LIST: [f64; 10] =
    [0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.10];
/// Default over-rotation sweep points.
pub const DEFAULT_DELTA_LIST: [f64; 9] = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8];
/// Over-rotation of the ill-behaved table candidate.
pub const BAD_CANDIDATE_DELTA: f64 = 0.4;
/// Stages per synthetic benchmark pipeline.
pub const BENCH_STAGES: usize = 6;

/// Effective settings for one command run, after defaults and the
/// `QCIVET_OUT` environment override are applied.
#[derive(Debug, Clone)]
pub struct GlobalOpts {
    /// RNG seed; every estimate stream derives from it.
    pub seed: u64,
    /// Output directory (created if missing).
    pub out: PathBuf,
    /// Shots per observable estimate.
    pub shots: u32,
    /// Trials per sweep point.
    pub trials: u32,
    /// Rotation angle of the reference preparation.
    pub theta: f64,
    /// Depolarizing strengths for noise sweeps.
    pub p_list: Vec<f64>,
    /// Over-rotations for δ sweeps.
    pub delta_list: Vec<f64>,
}

impl GlobalOpts {
    /// Defaults with a given output directory.
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            seed: DEFAULT_SEED,
            out: out.into(),
            shots: DEFAULT_SHOTS,
            trials: DEFAULT_TRIALS,
            theta: DEFAULT_THETA,
            p_list: DEFAULT_P_LIST.to_vec(),
            delta_list: DEFAULT_DELTA_LIST.to_vec(),
        }
    }
}

/// Render a float for CSV output: scientific, nine significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// Collector for one command's artifacts; writes the manifest at the end.
struct RunContext<'a> {
    opts: &'a GlobalOpts,
    command: &'static str,
    written: Vec<String>,
}

impl<'a> RunContext<'a> {
    fn new(command: &'static str, opts: &'a GlobalOpts) -> Result<Self> {
        fs::create_dir_all(&opts.out)
            .with_context(|| format!("creating output directory {}", opts.out.display()))?;
        Ok(Self { opts, command, written: Vec::new() })
    }

    fn write_file(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.opts.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Write `<stem>_manifest.json`: command, seed, effective parameters,
    /// and the sorted list of artifacts this run wrote.
    fn finish(mut self, stem: &str, parameters: StageSpec) -> Result<()> {
        self.written.sort();
        let seed = i64::try_from(self.opts.seed).context("seed exceeds the manifest range")?;
        let mut manifest = StageSpec::new().with("command", self.command).with("seed", seed);
        manifest.insert("parameters", SpecValue::Map(parameters.entries().clone()));
        manifest.insert(
            "output_paths",
            SpecValue::Array(self.written.iter().map(|p| SpecValue::from(p.as_str())).collect()),
        );
        let bytes = canonicalize(&manifest)?;
        let name = format!("{stem}_manifest.json");
        let path = self.opts.out.join(&name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn float_list_value(values: &[f64]) -> SpecValue {
    SpecValue::Array(values.iter().map(|v| SpecValue::from(*v)).collect())
}

/// The three deviation-table candidates against the reference `R_y(θ)`:
/// an identical upgrade, an over-rotation by [`BAD_CANDIDATE_DELTA`], and
/// the sneaky override constructed to fool the Z-only contract.
fn table_candidates(theta: f64) -> Result<(Channel, Vec<(&'static str, Channel)>)> {
    let reference = Channel::unitary(ry(theta)?)?;
    let good = Channel::unitary(ry(theta)?)?;
    let bad = Channel::unitary(ry(theta + BAD_CANDIDATE_DELTA)?)?;
    let sneaky = make_sneaky(&reference, &Observable::pauli(Pauli::Z))?;
    Ok((reference, vec![("B_good", good), ("B_bad", bad), ("B_sneaky", sneaky)]))
}

/// Worst-deviation table for the three candidates under the full-XYZ and
/// weak-Z contracts, plus the per-(candidate, input, observable) grid.
/// Writes `deviation_table.csv` and `deviation_grid.csv`.
pub fn cmd_exp1(opts: &GlobalOpts) -> Result<()> {
    let mut ctx = RunContext::new("exp1", opts)?;
    let inputs = standard_inputs();
    let full = Contract::new(ObservableFamily::full_xyz(), 0.05, inputs.clone())?;
    let weak = Contract::new(ObservableFamily::weak_z(), 0.05, inputs)?;
    let (reference, candidates) = table_candidates(opts.theta)?;

    let mut table = String::from("candidate,full_xyz_worst,weak_z_worst\n");
    let mut grid = String::from("candidate,input_index,observable,deviation\n");
    for (name, candidate) in &candidates {
        let full_report = worst_deviation(&reference, candidate, &full)?;
        let weak_report = worst_deviation(&reference, candidate, &weak)?;
        writeln!(
            table,
            "{name},{},{}",
            fmt_float(full_report.worst),
            fmt_float(weak_report.worst)
        )?;
        for cell in &full_report.per_cell {
            writeln!(
                grid,
                "{name},{},{},{}",
                cell.input_index,
                cell.observable_label,
                fmt_float(cell.deviation)
            )?;
        }
        println!(
            "exp1 {name}: full-XYZ worst {:.6}, weak-Z worst {:.6}",
            full_report.worst, weak_report.worst
        );
    }
    ctx.write_file("deviation_table.csv", &table)?;
    ctx.write_file("deviation_grid.csv", &grid)?;
    ctx.finish("exp1", StageSpec::new().with("theta", opts.theta))
}

/// Partial-trace oracle: ten random two-qubit states α|00⟩ + β|11⟩; the
/// reduced state after tracing the first qubit must equal
/// diag(|α|², |β|²). Writes `partial_trace.csv`.
pub fn cmd_exp2(opts: &GlobalOpts) -> Result<()> {
    let mut ctx = RunContext::new("exp2", opts)?;
    let mut rng = SplitMix64::stream(opts.seed, &[20]);
    let mut csv = String::from("trial,alpha_re,alpha_im,beta_re,beta_im,frobenius_distance\n");
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let t = rng.uniform(0.0, std::f64::consts::FRAC_PI_2);
        let phase = rng.uniform(0.0, 2.0 * std::f64::consts::PI);
        let alpha = num_complex::Complex64::new(t.cos(), 0.0);
        let beta = num_complex::Complex64::from_polar(t.sin(), phase);
        let amplitudes = [
            alpha,
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
            beta,
        ];
        let joint = DensityOperator::from_state_vector(&amplitudes)?;
        let reduced = joint.partial_trace_first()?;
        let mut expected = reduced.matrix().clone();
        expected.set(0, 0, num_complex::Complex64::new(alpha.norm_sqr(), 0.0));
        expected.set(0, 1, num_complex::Complex64::new(0.0, 0.0));
        expected.set(1, 0, num_complex::Complex64::new(0.0, 0.0));
        expected.set(1, 1, num_complex::Complex64::new(beta.norm_sqr(), 0.0));
        let distance = reduced.matrix().frobenius_distance(&expected)?;
        worst = worst.max(distance);
        writeln!(
            csv,
            "{trial},{},{},{},{},{}",
            fmt_float(alpha.re),
            fmt_float(alpha.im),
            fmt_float(beta.re),
            fmt_float(beta.im),
            fmt_float(distance)
        )?;
    }
    ctx.write_file("partial_trace.csv", &csv)?;
    println!("exp2: worst Frobenius distance over 10 trials = {worst:.3e}");
    ctx.finish("exp2", StageSpec::new().with("trials", 10i64))
}

fn run_noise_sweep(opts: &GlobalOpts) -> Result<Vec<(f64, TrialStats)>> {
    let prep = Channel::unitary(ry(opts.theta)?)?;
    let reference = Channel::unitary(ry(opts.theta)?)?;
    let cfg = ShotConfig::new(opts.shots, opts.trials, opts.seed)?;
    Ok(noise_sweep(&prep, &reference, &opts.p_list, &cfg)?)
}

/// Depolarizing sweep: worst-case shot-estimated deviation of the honest
/// preparation from its noiseless reference, per p. Writes
/// `noise_sweep.csv`.
pub fn cmd_exp3(opts: &GlobalOpts) -> Result<()> {
    let mut ctx = RunContext::new("exp3", opts)?;
    let stats = run_noise_sweep(opts)?;
    let mut csv = String::from("p,mean_deviation,std_deviation,p95_deviation\n");
    for (p, s) in &stats {
        writeln!(
            csv,
            "{},{},{},{}",
            fmt_float(*p),
            fmt_float(s.mean),
            fmt_float(s.std),
            fmt_float(s.p95)
        )?;
    }
    ctx.write_file("noise_sweep.csv", &csv)?;
    println!("exp3: {} sweep points, {} trials each", stats.len(), opts.trials);
    ctx.finish("exp3", sweep_parameters(opts, true, false))
}

/// Over-rotation sweep: analytic full-XYZ and Z-only deviations of
/// `R_y(θ+δ)` against `R_y(θ)` per δ. Writes `delta_sweep.csv`.
pub fn cmd_exp4(opts: &GlobalOpts) -> Result<()> {
    let mut ctx = RunContext::new("exp4", opts)?;
    let points = delta_sweep(opts.theta, &opts.delta_list)?;
    let mut csv = String::from("delta,full_deviation,z_deviation\n");
    for point in &points {
        writeln!(
            csv,
            "{},{},{}",
            fmt_float(point.delta),
            fmt_float(point.full_dev),
            fmt_float(point.z_dev)
        )?;
    }
    ctx.write_file("delta_sweep.csv", &csv)?;
    println!("exp4: {} δ points", points.len());
    ctx.finish("exp4", sweep_parameters(opts, false, true))
}

/// Calibration-window overlay: the sampled noise floor (p95 per p) and the
/// analytic logic-deviation curve (full-XYZ per δ) in one long-format CSV.
/// Writes `calibration_window.csv`.
pub fn cmd_window(opts: &GlobalOpts) -> Result<()> {
    let mut ctx = RunContext::new("window", opts)?;
    let noise = run_noise_sweep(opts)?;
    let logic: Vec<(f64, f64)> = delta_sweep(opts.theta, &opts.delta_list)?
        .into_iter()
        .map(|point| (point.delta, point.full_dev))
        .collect();
    let rows = calibration_window(&noise, &logic)?;
    let mut csv = String::from("series,x,value\n");
    for row in &rows {
        writeln!(csv, "{},{},{}", row.series.label(), fmt_float(row.x), fmt_float(row.value))?;
    }
    ctx.write_file("calibration_window.csv", &csv)?;
    println!("window: {} overlay rows", rows.len());
    ctx.finish("window", sweep_parameters(opts, true, true))
}

fn sweep_parameters(opts: &GlobalOpts, with_p: bool, with_delta: bool) -> StageSpec {
    let mut spec = StageSpec::new()
        .with("theta", opts.theta)
        .with("shots", i64::from(opts.shots))
        .with("trials", i64::from(opts.trials));
    if with_p {
        spec.insert("p_list", float_list_value(&opts.p_list));
    }
    if with_delta {
        spec.insert("delta_list", float_list_value(&opts.delta_list));
    }
    spec
}

/// Build one of the four scripted chain scenarios over the six VQE stage
/// specs, replay it, and export the trail plus a verdict report. Returns
/// the violation for the three attack kinds.
pub fn cmd_chain_demo(
    opts: &GlobalOpts,
    kind: ChainScenario,
) -> Result<Option<IntegrityViolation>> {
    let mut ctx = RunContext::new("chain-demo", opts)?;
    let base = PipelineTemplate::for_domain(Domain::Vqe).stages;
    let log = scenario(kind, &base)?;
    let verification = log.verify_full_chain();
    let label = kind.label();

    ctx.write_file(&format!("chain_{label}.jsonl"), log.export_jsonl()?)?;
    let mut report = StageSpec::new().with("kind", label).with("ok", verification.is_ok());
    let violation = match &verification {
        ChainVerification::Ok => None,
        ChainVerification::Failed { index, fault } => {
            let mut failure = std::collections::BTreeMap::new();
            failure.insert("index".to_string(), SpecValue::from(*index as i64));
            failure.insert("fault".to_string(), SpecValue::from(fault.label()));
            report.insert("failure", SpecValue::Map(failure));
            Some(IntegrityViolation {
                kind: ViolationKind::Hash,
                stage_index: *index,
                message: format!("chain replay: {fault} at stage {index}"),
            })
        }
    };
    ctx.write_file(&format!("chain_{label}_report.json"), canonicalize(&report)?)?;
    match &verification {
        ChainVerification::Ok => {
            println!("chain-demo {label}: replay ok over {} records", log.len())
        }
        ChainVerification::Failed { index, fault } => {
            println!("chain-demo {label}: {fault} at stage {index}")
        }
    }
    ctx.finish(&format!("chain_{label}"), StageSpec::new().with("kind", label))?;
    Ok(violation)
}

/// Run one (domain, scenario) demo end to end, exporting the trail the
/// scenario leaves behind and the outcome report. Returns the violation
/// whichever layer raised one.
pub fn cmd_demo(
    opts: &GlobalOpts,
    domain: Domain,
    scen: Scenario,
) -> Result<Option<IntegrityViolation>> {
    let mut ctx = RunContext::new("demo", opts)?;
    let run = run_demo(domain, scen, opts.seed)?;
    let stem = format!("demo_{}_{}", domain.label(), scen.label());
    ctx.write_file(&format!("{stem}.jsonl"), run.log.export_jsonl()?)?;
    ctx.write_file(&format!("{stem}_report.json"), canonicalize(&run.outcome.report_spec())?)?;
    println!(
        "demo {} {}: caught_by = {}",
        domain.label(),
        scen.label(),
        run.outcome.caught_by.label()
    );
    ctx.finish(
        &stem,
        StageSpec::new().with("domain", domain.label()).with("scenario", scen.label()),
    )?;
    Ok(run.outcome.violation)
}

/// Benchmark the commit path: `reps` six-stage pipelines against an
/// in-memory anchor. Statistics go to stdout; only the manifest is
/// written (timings are machine-dependent and excluded from artifacts).
pub fn cmd_bench(opts: &GlobalOpts, reps: usize) -> Result<BenchStats> {
    let ctx = RunContext::new("bench", opts)?;
    let stats = bench_commit(BENCH_STAGES, reps)?;
    println!(
        "bench: {} commits over {} reps of {} stages",
        stats.reps * stats.n_stages,
        stats.reps,
        stats.n_stages
    );
    println!("  per-commit median {:.1} µs", stats.median_us);
    println!("  per-commit p99    {:.1} µs", stats.p99_us);
    println!("  per-commit mean   {:.1} µs", stats.mean_us);
    println!("  six-stage median  {:.1} µs", stats.pipeline_median_us);
    ctx.finish(
        "bench",
        StageSpec::new()
            .with("reps", i64::try_from(reps).context("reps exceeds the manifest range")?)
            .with("n_stages", BENCH_STAGES as i64),
    )?;
    Ok(stats)
}

/// Chain scenario names as CLI values.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    /// Untouched chain.
    Honest,
    /// In-place edit of one committed spec.
    Tamper,
    /// Spliced-in forged record.
    Inject,
    /// Removed record.
    Skip,
}

impl From<KindArg> for ChainScenario {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::Honest => ChainScenario::Honest,
            KindArg::Tamper => ChainScenario::Tamper,
            KindArg::Inject => ChainScenario::Inject,
            KindArg::Skip => ChainScenario::Skip,
        }
    }
}

/// Demo domains as CLI values.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DomainArg {
    /// Molecular ground-state estimation.
    Vqe,
    /// Quantum-kernel fraud scoring.
    Fraud,
    /// Multi-tenant cloud execution.
    Cloud,
}

impl From<DomainArg> for Domain {
    fn from(domain: DomainArg) -> Self {
        match domain {
            DomainArg::Vqe => Domain::Vqe,
            DomainArg::Fraud => Domain::Fraud,
            DomainArg::Cloud => Domain::Cloud,
        }
    }
}

/// Demo scenarios as CLI values.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    /// Honest end-to-end run.
    Clean,
    /// Post-commit record edit.
    Tamper,
    /// Out-of-tolerance hardware.
    Drift,
    /// Offline chain rewrite.
    Rewrite,
}

impl From<ScenarioArg> for Scenario {
    fn from(scen: ScenarioArg) -> Self {
        match scen {
            ScenarioArg::Clean => Scenario::Clean,
            ScenarioArg::Tamper => Scenario::Tamper,
            ScenarioArg::Drift => Scenario::Drift,
            ScenarioArg::Rewrite => Scenario::Rewrite,
        }
    }
}

/// `qcivet`: integrity-verification experiments and demos for staged
/// hybrid quantum-classical pipelines.
#[derive(Debug, Parser)]
#[command(name = "qcivet", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// RNG seed; identical seeds give byte-identical outputs.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Output directory for CSV/JSON artifacts. The QCIVET_OUT environment
    /// variable, when set, overrides this flag.
    #[arg(long, global = true, value_name = "DIR", default_value = "qcivet-out")]
    pub out: PathBuf,

    /// Shots per observable estimate.
    #[arg(long, global = true, default_value_t = DEFAULT_SHOTS)]
    pub shots: u32,

    /// Trials per sweep point.
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    pub trials: u32,

    /// Comma-separated depolarizing strengths for noise sweeps
    /// [default: 0,0.001,0.002,0.005,0.01,0.02,0.03,0.05,0.07,0.1].
    #[arg(long = "p-list", global = true, value_delimiter = ',', num_args = 1..)]
    pub p_list: Option<Vec<f64>>,

    /// Comma-separated over-rotations for δ sweeps
    /// [default: 0,0.01,0.02,0.05,0.1,0.2,0.4,0.6,0.8].
    #[arg(long = "delta-list", global = true, value_delimiter = ',', num_args = 1..)]
    pub delta_list: Option<Vec<f64>>,

    /// Rotation angle of the reference preparation [default: 2π/5].
    #[arg(long, global = true)]
    pub theta: Option<f64>,
}

/// The subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Worst-deviation table and per-cell grid for the three candidates.
    Exp1,
    /// Partial-trace oracle over ten random two-qubit states.
    Exp2,
    /// Depolarizing noise sweep (shot-sampled deviation vs p).
    Exp3,
    /// Over-rotation sweep (analytic deviation vs δ).
    Exp4,
    /// Combined noise-floor / logic-deviation overlay.
    Window,
    /// One scripted hash-chain scenario, replayed and reported.
    ChainDemo {
        /// Which scenario to build.
        #[arg(value_enum)]
        kind: KindArg,
    },
    /// One end-to-end pipeline demo under one scenario.
    Demo {
        /// Which pipeline to run.
        #[arg(value_enum)]
        domain: DomainArg,
        /// Which scenario to apply.
        #[arg(value_enum)]
        scenario: ScenarioArg,
    },
    /// Commit-path latency benchmark (stats to stdout).
    Bench {
        /// Synthetic six-stage pipelines to run.
        #[arg(long, default_value_t = 200)]
        reps: usize,
    },
}

impl Cli {
    /// Resolve flags into effective options, applying defaults and the
    /// `QCIVET_OUT` override.
    pub fn to_opts(&self) -> GlobalOpts {
        let out = match std::env::var_os("QCIVET_OUT") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out.clone(),
        };
        GlobalOpts {
            seed: self.seed,
            out,
            shots: self.shots,
            trials: self.trials,
            theta: self.theta.unwrap_or(DEFAULT_THETA),
            p_list: self.p_list.clone().unwrap_or_else(|| DEFAULT_P_LIST.to_vec()),
            delta_list: self.delta_list.clone().unwrap_or_else(|| DEFAULT_DELTA_LIST.to_vec()),
        }
    }
}

/// Dispatch a parsed command line. Returns the detected violation, if the
/// command's scenario contained one, so the binary can map it to its exit
/// code.
pub fn run(cli: Cli) -> Result<Option<IntegrityViolation>> {
    let opts = cli.to_opts();
    match cli.command {
        Command::Exp1 => cmd_exp1(&opts).map(|()| None),
        Command::Exp2 => cmd_exp2(&opts).map(|()| None),
        Command::Exp3 => cmd_exp3(&opts).map(|()| None),
        Command::Exp4 => cmd_exp4(&opts).map(|()| None),
        Command::Window => cmd_window(&opts).map(|()| None),
        Command::ChainDemo { kind } => cmd_chain_demo(&opts, kind.into()),
        Command::Demo { domain, scenario } => cmd_demo(&opts, domain.into(), scenario.into()),
        Command::Bench { reps } => cmd_bench(&opts, reps).map(|_| None),
    }
}
