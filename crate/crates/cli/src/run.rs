//! Scenario execution: render the artifact, write it atomically, report.

use std::fmt;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ontic_core::channels::scenarios::{plus_probe, SemigroupKind, SemigroupScenario};
use ontic_core::channels::{verify_cptp, ChannelJson};
use ontic_core::measurement::{
    born_conditional_check, decoherence_scaling_sweep, error_entropy_bound, linear_fit, simulate_measurement,
    sweep_to_csv,
};
use ontic_core::opendyn::{bell_vs_mixed, nonlinearity_witness, werner_pair, witness_channel};
use ontic_core::qcore::gates;
use ontic_core::qcore::json::{Num, SpacedMatrixJson};
use ontic_core::qcore::linalg::{kron, CMatrix};
use ontic_core::trajectories::{
    bloch_helix, enumerate_trajectory_measure, helix_to_csv, markov_chain_from_repeated_interaction,
    sample_trajectories, sample_trajectory, trajectory_counts,
};
use ontic_core::{
    tolerance, CVector, ConditionalProbabilityTable, DensityMatrix, Error, HilbertSpace, MarkovKernelChain,
    MeasurementModel, PureState, QuantumChannel,
};
use serde_json::{json, Value};

use crate::config::{
    Format, HelixParams, MeasureParams, NonlinearParams, PairKind, Params, ScenarioConfig, SemigroupFamily,
    SemigroupParams, SubjectState, SweepParams, TrajectoriesParams, VerifyParams,
};

pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunError {
    pub code: i32,
    pub message: String,
}

impl RunError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::ToleranceBreach(_) | Error::NotTracePreserving { .. } | Error::NotPSD { .. } => EXIT_TOLERANCE,
            Error::Json(_) => EXIT_PARSE,
            _ => EXIT_VALIDATION,
        };
        RunError::new(code, err.to_string())
    }
}

/// A finished scenario. `exit_code` is nonzero when the artifact was written
/// but reports a failed check (currently only `verify`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub summary: String,
    pub exit_code: i32,
}

/// Rendered artifact before it touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub contents: String,
    /// Summary without the output path.
    pub summary: String,
    pub exit_code: i32,
}

/// Applies `ONTIC_SIM_TOLERANCE_SCALE` if set.
pub fn apply_tolerance_scale(value: Option<&str>) -> Result<(), RunError> {
    let Some(raw) = value else { return Ok(()) };
    let scale: f64 = raw.trim().parse().map_err(|_| {
        RunError::new(
            EXIT_VALIDATION,
            format!("ONTIC_SIM_TOLERANCE_SCALE `{raw}` is not a number"),
        )
    })?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(RunError::new(
            EXIT_VALIDATION,
            format!("ONTIC_SIM_TOLERANCE_SCALE must be positive, got {raw}"),
        ));
    }
    tolerance::set_scale(scale);
    Ok(())
}

/// Renders the scenario, writes it to `config.output_path` and returns the
/// one-line summary.
pub fn run(config: &ScenarioConfig) -> Result<Outcome, RunError> {
    let artifact = render(config)?;
    write_atomic(&config.output_path, artifact.contents.as_bytes())
        .map_err(|e| RunError::new(EXIT_IO, format!("cannot write {}: {e}", config.output_path.display())))?;
    Ok(Outcome {
        summary: format!("{} -> {}", artifact.summary, config.output_path.display()),
        exit_code: artifact.exit_code,
    })
}

pub fn render(config: &ScenarioConfig) -> Result<Artifact, RunError> {
    let (contents, mut summary, exit_code) = match &config.params {
        Params::Measure(p) => measure(p, config.format)?,
        Params::Sweep(p) => sweep(p, config.format)?,
        Params::Semigroup(p) => semigroup(p, config.format)?,
        Params::Trajectories(p) => trajectories(p, config.seed, config.format)?,
        Params::Helix(p) => helix(p, config.seed, config.format)?,
        Params::Nonlinear(p) => nonlinear(p, config.format)?,
        Params::Verify(p) => verify(p, config.format)?,
    };
    if config.scenario.is_stochastic() {
        summary = format!("{} seed={} {}", config.scenario, config.seed, summary);
    } else {
        summary = format!("{} {}", config.scenario, summary);
    }
    Ok(Artifact {
        contents,
        summary,
        exit_code,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

type Rendered = (String, String, i32);

fn subject_state(p: &MeasureParams) -> Result<PureState, RunError> {
    let amps: Vec<f64> = match &p.state {
        SubjectState::Uniform => vec![(p.subject_dim as f64).recip().sqrt(); p.subject_dim],
        SubjectState::Amplitudes(a) => a.clone(),
        SubjectState::BornWeights(w) => w.iter().map(|x| x.sqrt()).collect(),
    };
    let space = HilbertSpace::single("s", p.subject_dim)?;
    // the parser accepts norms within 1e-9; normalize the rest away
    Ok(PureState::normalized(
        space,
        CVector::from_iterator(amps.len(), amps.iter().map(|&a| a.into())),
    )?)
}

fn model(p: &MeasureParams) -> Result<MeasurementModel, RunError> {
    Ok(MeasurementModel::new(
        p.subject_dim,
        p.n_a,
        p.n_e,
        p.gamma_a,
        p.gamma_e,
        p.dt,
    )?)
}

const MEASURE_HEADER: &str =
    "N_A,N_E,overlap_A,overlap_E,coherence_factor,max_offdiag,max_born_deviation,born_conditional_defect,S_max,bound";

fn measure(p: &MeasureParams, format: Format) -> Result<Rendered, RunError> {
    let psi = subject_state(p)?;
    let m = model(p)?;
    let report = simulate_measurement(&m, &psi)?;
    let born_defect = born_conditional_check(&m, &psi, p.delta_deg)?;
    let entropy = error_entropy_bound(&m, report.max_born_deviation);
    let contents = match format {
        Format::Csv => format!(
            "{MEASURE_HEADER}\n{},{},{},{},{},{},{},{},{},{}\n",
            m.n_a(),
            m.n_e(),
            Num(report.overlap_a),
            Num(report.overlap_e),
            Num(report.coherence_factor),
            Num(report.max_offdiag),
            Num(report.max_born_deviation),
            Num(born_defect),
            Num(entropy.s_max),
            Num(entropy.bound)
        ),
        Format::Json => pretty(&json!({
            "N_A": m.n_a(),
            "N_E": m.n_e(),
            "overlap_A": report.overlap_a,
            "overlap_E": report.overlap_e,
            "coherence_factor": report.coherence_factor,
            "max_offdiag": report.max_offdiag,
            "max_born_deviation": report.max_born_deviation,
            "born_conditional_defect": born_defect,
            "S_max": entropy.s_max,
            "bound": entropy.bound,
            "born_targets": report.born_targets,
            "ontic_probabilities": report.ontic.probabilities(),
            "matched_outcomes": report.matched_outcomes,
            "rho_s": serde_json::to_value(SpacedMatrixJson::new(report.rho_s.space(), report.rho_s.matrix()))
                .expect("matrix serializes"),
        })),
    };
    let summary = format!(
        "N_A={} N_E={} max_offdiag={:.6e} max_born_deviation={:.6e}",
        m.n_a(),
        m.n_e(),
        report.max_offdiag,
        report.max_born_deviation
    );
    Ok((contents, summary, 0))
}

fn sweep(p: &SweepParams, format: Format) -> Result<Rendered, RunError> {
    let psi = subject_state(&p.model)?;
    let template = model(&p.model)?;
    let rows = decoherence_scaling_sweep(&template, &psi, &p.n_values)?;
    let expected = -p.model.gamma_a * p.model.dt;
    // the fit needs a strictly positive coherence at every point
    let fit = rows.iter().all(|r| r.max_offdiag > 0.0).then(|| {
        let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.max_offdiag.ln()).collect();
        linear_fit(&x, &y)
    });
    let contents = match format {
        Format::Csv => sweep_to_csv(&rows),
        Format::Json => pretty(&json!({
            "rows": rows,
            "slope": fit.map(|f| f.0),
            "intercept": fit.map(|f| f.1),
            "expected_slope": expected,
        })),
    };
    let summary = match fit {
        Some((slope, _)) => format!("points={} slope={slope:.6} expected={expected:.6}", rows.len()),
        None => format!("points={} slope=undefined (no coherence to fit)", rows.len()),
    };
    Ok((contents, summary, 0))
}

fn semigroup(p: &SemigroupParams, format: Format) -> Result<Rendered, RunError> {
    let kinds: Vec<SemigroupKind> = match p.family {
        SemigroupFamily::All => SemigroupKind::ALL.to_vec(),
        SemigroupFamily::Entangling => vec![SemigroupKind::Entangling],
        SemigroupFamily::Factorized => vec![SemigroupKind::Factorized],
        SemigroupFamily::Refactorizing => vec![SemigroupKind::Refactorizing],
    };
    let probe = plus_probe();
    let mut results = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let defect = SemigroupScenario::new(kind)?.defect(p.t1, p.t2, &probe)?;
        results.push((kind.name(), defect));
    }
    let contents = match format {
        Format::Csv => {
            let mut s = String::from("family,t1,t2,defect\n");
            for (name, d) in &results {
                writeln!(s, "{name},{},{},{}", Num(p.t1), Num(p.t2), Num(*d)).expect("string write");
            }
            s
        }
        Format::Json => pretty(&Value::Array(
            results
                .iter()
                .map(|(name, d)| json!({"family": name, "t1": p.t1, "t2": p.t2, "defect": d}))
                .collect(),
        )),
    };
    let parts: Vec<String> = results.iter().map(|(n, d)| format!("{n}={d:.3e}")).collect();
    Ok((
        contents,
        format!("t1={} t2={} defects: {}", p.t1, p.t2, parts.join(" ")),
        0,
    ))
}

/// field·Z⊗1/2 + coupling·(X⊗X + Y⊗Y)/2 on s ⊗ e.
fn exchange_generator(field: f64, coupling: f64) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    kron(&gates::pauli_z(), &id).scale(field / 2.0)
        + (kron(&gates::pauli_x(), &gates::pauli_x()) + kron(&gates::pauli_y(), &gates::pauli_y()))
            .scale(coupling / 2.0)
}

fn trajectories(p: &TrajectoriesParams, seed: u64, format: Format) -> Result<Rendered, RunError> {
    let rho_s0 = DensityMatrix::diagonal(HilbertSpace::qubit("s"), &[1.0 - p.s_excited, p.s_excited])?;
    let rho_e = DensityMatrix::diagonal(HilbertSpace::qubit("e"), &[1.0 - p.env_excited, p.env_excited])?;
    let h = exchange_generator(p.field, p.coupling);
    let model = markov_chain_from_repeated_interaction(&h, &rho_e, &rho_s0, p.step, p.steps, p.delta_deg)?;
    let chain = &model.chain;
    // start in the most probable ontic state of ρ_S(t₀)
    let initial = 0;
    let measure = enumerate_trajectory_measure(chain, 2, initial)?;
    let total = measure.total();
    if (total - 1.0).abs() > tolerance::row_sum() {
        return Err(RunError::new(
            EXIT_TOLERANCE,
            format!("trajectory measure sums to {total}"),
        ));
    }
    let samples = sample_trajectories(chain, initial, seed, p.samples)?;
    let counts = trajectory_counts(&samples);
    let freq = |idx: &[usize]| *counts.get(idx).unwrap_or(&0) as f64 / p.samples as f64;
    let max_freq_error = measure
        .trajectories
        .iter()
        .map(|t| (freq(&t.indices) - t.p).abs())
        .fold(0.0, f64::max);
    let chosen = &samples[p.trajectory_id];

    let contents = match format {
        Format::Csv => {
            let mut s = String::new();
            let cols: Vec<String> = (0..=p.steps).map(|k| format!("i{k}")).collect();
            writeln!(s, "{},p,frequency", cols.join(",")).expect("string write");
            for t in &measure.trajectories {
                let idx: Vec<String> = t.indices.iter().map(usize::to_string).collect();
                writeln!(s, "{},{},{}", idx.join(","), Num(t.p), Num(freq(&t.indices))).expect("string write");
            }
            s
        }
        Format::Json => pretty(&json!({
            "seed": seed,
            "times": measure.times,
            "initial_index": initial,
            "total": total,
            "samples": p.samples,
            "trajectories": measure.trajectories.iter().map(|t| json!({
                "indices": t.indices,
                "p": t.p,
                "frequency": freq(&t.indices),
            })).collect::<Vec<_>>(),
            "trajectory": {"id": p.trajectory_id, "indices": chosen.indices(), "jumps": chosen.jumps()},
        })),
    };
    let summary = format!(
        "steps={} samples={} total={total:.12} max_freq_error={max_freq_error:.4e} trajectory[{}]={:?}",
        p.steps,
        p.samples,
        p.trajectory_id,
        chosen.indices()
    );
    Ok((contents, summary, 0))
}

fn helix(p: &HelixParams, seed: u64, format: Format) -> Result<Rendered, RunError> {
    let h = p.hop_probability;
    let kernel = ConditionalProbabilityTable::kernel("strand", vec![vec![1.0 - h, h], vec![h, 1.0 - h]])?;
    let dt = p.t_max / (p.points - 1) as f64;
    let chain = MarkovKernelChain::homogeneous(kernel, dt, p.points - 1)?;
    let traj = sample_trajectory(&chain, 0, seed)?;
    let helix = bloch_helix(p.omega, chain.times());
    let contents = match format {
        Format::Csv => helix_to_csv(&helix, traj.indices())?,
        Format::Json => {
            let mut v = serde_json::to_value(&helix).expect("helix serializes");
            v["omega"] = json!(p.omega);
            v["seed"] = json!(seed);
            v["indices"] = json!(traj.indices());
            pretty(&v)
        }
    };
    let summary = format!("omega={} points={} hops={}", p.omega, p.points, traj.jumps());
    Ok((contents, summary, 0))
}

fn nonlinear(p: &NonlinearParams, format: Format) -> Result<Rendered, RunError> {
    let pair = match p.pair {
        PairKind::Bell => bell_vs_mixed(),
        PairKind::Werner => werner_pair(p.werner_p)?,
    };
    let ch = witness_channel(&p.channel)?;
    let report = nonlinearity_witness(&ch, &pair.rho_1, &pair.rho_2, &["s"])?;
    let out = report.to_json(&p.channel, &pair.id);
    let contents = match format {
        Format::Csv => format!(
            "pair_id,channel,distance_before,distance_after\n{},{},{},{}\n",
            out.pair_id,
            out.channel,
            Num(out.distance_before),
            Num(out.distance_after)
        ),
        Format::Json => pretty(&serde_json::to_value(&out).expect("report serializes")),
    };
    let summary = format!(
        "pair={} channel={} distance_before={:.3e} distance_after={:.12}",
        out.pair_id, out.channel, out.distance_before, out.distance_after
    );
    Ok((contents, summary, 0))
}

fn verify(p: &VerifyParams, format: Format) -> Result<Rendered, RunError> {
    let text = std::fs::read_to_string(&p.channel_path)
        .map_err(|e| RunError::new(EXIT_PARSE, format!("cannot read {}: {e}", p.channel_path.display())))?;
    let json: ChannelJson = serde_json::from_str(&text)
        .map_err(|e| RunError::new(EXIT_PARSE, format!("{}: {e}", p.channel_path.display())))?;
    let ch = QuantumChannel::from_json_unchecked(&json)?;
    let report = verify_cptp(&ch);
    let contents = match format {
        Format::Csv => format!(
            "trace_preserving,completely_positive,min_choi_eigenvalue,completeness_defect\n{},{},{},{}\n",
            report.trace_preserving,
            report.completely_positive,
            Num(report.min_choi_eigenvalue),
            Num(report.completeness_defect)
        ),
        Format::Json => {
            let mut v = serde_json::to_value(report).expect("report serializes");
            v["kraus_operators"] = json!(ch.kraus().len());
            pretty(&v)
        }
    };
    let verdict = if report.is_cptp() { "CPTP" } else { "NOT CPTP" };
    let summary = format!(
        "{verdict} completeness_defect={:.3e} min_choi_eigenvalue={:.3e}",
        report.completeness_defect, report.min_choi_eigenvalue
    );
    Ok((contents, summary, if report.is_cptp() { 0 } else { EXIT_TOLERANCE }))
}
