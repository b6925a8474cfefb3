//! Von Neumann measurement with a factorized apparatus and environment.
//!
//! A subject in superposition Σ Ψ_m |m⟩ entangles with N_A apparatus factors
//! and N_E environment factors. Under the factorization assumption the pointer
//! overlaps are products of per-factor overlaps, so the post-measurement
//! subject state is
//!
//! ```text
//! ρ_S[m₁, m₂] = Ψ_{m₁} Ψ*_{m₂} · c_A(m₁,m₂) · c_E(m₁,m₂),   c_X = overlap_fn(γ_X, Δt)^{N_X}
//! ```
//!
//! and is built here in closed form. [`materialized_subject_state`] builds the
//! same state from explicit pointer vectors for small N.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ontic::{ontic_decomposition, OnticDecomposition};
use crate::qcore::json::Num;
use crate::qcore::linalg::{self, CMatrix, CVector};
use crate::qcore::{DensityMatrix, HilbertSpace, PureState};
use crate::tolerance;

/// Default slack for [`error_entropy_bound`].
pub const DEFAULT_ENTROPY_SLACK: f64 = 10.0;

/// Largest total dimension the materialized cross-check will build.
pub const MATERIALIZED_DIM_LIMIT: usize = 1 << 16;

/// Per-factor overlap magnitude c(γ, Δt).
#[derive(Clone, Default)]
pub enum OverlapFn {
    /// exp(−γΔt)
    #[default]
    Exponential,
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl OverlapFn {
    pub fn eval(&self, gamma: f64, dt: f64) -> f64 {
        match self {
            OverlapFn::Exponential => (-gamma * dt).exp(),
            OverlapFn::Custom(f) => f(gamma, dt),
        }
    }

    /// c^N; the exponential case is evaluated as exp(−NγΔt) directly.
    fn power(&self, gamma: f64, dt: f64, n: usize) -> f64 {
        match self {
            OverlapFn::Exponential => (-(n as f64) * gamma * dt).exp(),
            OverlapFn::Custom(_) => self.eval(gamma, dt).powi(n as i32),
        }
    }
}

impl fmt::Debug for OverlapFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverlapFn::Exponential => f.write_str("Exponential"),
            OverlapFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Apparatus,
    Environment,
}

#[derive(Debug, Clone)]
pub struct MeasurementModel {
    subject_dim: usize,
    n_a: usize,
    n_e: usize,
    gamma_a: f64,
    gamma_e: f64,
    dt: f64,
    overlap_fn: OverlapFn,
    /// (m₁, m₂, φ): ⟨A(m₂)|A(m₁)⟩ carries e^{iφ}, the transposed pair e^{−iφ}.
    pair_phases: Vec<(usize, usize, f64)>,
}

impl MeasurementModel {
    pub fn new(subject_dim: usize, n_a: usize, n_e: usize, gamma_a: f64, gamma_e: f64, dt: f64) -> Result<Self> {
        if subject_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "subject_dim must be ≥ 2, got {subject_dim}"
            )));
        }
        for (name, v) in [("gamma_a", gamma_a), ("gamma_e", gamma_e), ("dt", dt)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and ≥ 0, got {v}"
                )));
            }
        }
        Ok(Self {
            subject_dim,
            n_a,
            n_e,
            gamma_a,
            gamma_e,
            dt,
            overlap_fn: OverlapFn::Exponential,
            pair_phases: Vec::new(),
        })
    }

    /// Replaces the overlap function after spot-checking c(γ,0) = 1,
    /// c ∈ [0,1] and monotone decay on a few points up to Δt.
    pub fn with_overlap_fn(mut self, f: OverlapFn) -> Result<Self> {
        for gamma in [self.gamma_a, self.gamma_e] {
            let at_zero = f.eval(gamma, 0.0);
            if (at_zero - 1.0).abs() > tolerance::CONSTRUCTION {
                return Err(Error::InvalidParameter(format!(
                    "overlap_fn({gamma}, 0) = {at_zero}, expected 1"
                )));
            }
            let mut prev = at_zero;
            for k in 1..=8 {
                let v = f.eval(gamma, self.dt * k as f64 / 8.0);
                if !(0.0..=1.0).contains(&v) || v > prev + tolerance::CONSTRUCTION {
                    return Err(Error::InvalidParameter(
                        "overlap_fn must lie in [0,1] and be non-increasing in Δt".into(),
                    ));
                }
                prev = v;
            }
        }
        self.overlap_fn = f;
        Ok(self)
    }

    pub fn with_pair_phase(mut self, m1: usize, m2: usize, phi: f64) -> Result<Self> {
        if m1 == m2 || m1 >= self.subject_dim || m2 >= self.subject_dim || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("bad pair phase ({m1}, {m2}, {phi})")));
        }
        self.pair_phases.push((m1, m2, phi));
        Ok(self)
    }

    pub fn with_factors(&self, n_a: usize, n_e: usize) -> Self {
        Self {
            n_a,
            n_e,
            ..self.clone()
        }
    }

    pub fn subject_dim(&self) -> usize {
        self.subject_dim
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn gamma_a(&self) -> f64 {
        self.gamma_a
    }

    pub fn gamma_e(&self) -> f64 {
        self.gamma_e
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn total_factors(&self) -> usize {
        self.n_a + self.n_e
    }

    /// γ = (N_A γ_A + N_E γ_E) / N, or 0 without factors.
    pub fn mean_rate(&self) -> f64 {
        let n = self.total_factors();
        if n == 0 {
            0.0
        } else {
            (self.n_a as f64 * self.gamma_a + self.n_e as f64 * self.gamma_e) / n as f64
        }
    }

    fn phase(&self, m1: usize, m2: usize) -> Complex64 {
        let phi: f64 = self
            .pair_phases
            .iter()
            .map(|&(a, b, p)| {
                if (a, b) == (m1, m2) {
                    p
                } else if (a, b) == (m2, m1) {
                    -p
                } else {
                    0.0
                }
            })
            .sum();
        Complex64::from_polar(1.0, phi)
    }
}

/// overlap_fn(γ_X, Δt)^{N_X}.
pub fn pointer_overlap(model: &MeasurementModel, which: Which) -> f64 {
    match which {
        Which::Apparatus => model.overlap_fn.power(model.gamma_a, model.dt, model.n_a),
        Which::Environment => model.overlap_fn.power(model.gamma_e, model.dt, model.n_e),
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementOutcomeReport {
    pub rho_s: DensityMatrix,
    pub ontic: OnticDecomposition,
    pub born_targets: Vec<f64>,
    /// Outcome index m_s best aligned with each ontic state.
    pub matched_outcomes: Vec<usize>,
    pub max_born_deviation: f64,
    pub max_offdiag: f64,
    /// max over outcome pairs of |ρ_S[m₁,m₂]| / |Ψ_{m₁}Ψ_{m₂}|.
    pub coherence_factor: f64,
    pub overlap_a: f64,
    pub overlap_e: f64,
}

fn subject_amplitudes(model: &MeasurementModel, psi: &PureState) -> Result<CVector> {
    if psi.dim() != model.subject_dim {
        return Err(Error::SpaceMismatch(format!(
            "subject state has dimension {}, model expects {}",
            psi.dim(),
            model.subject_dim
        )));
    }
    Ok(psi.amplitudes().clone())
}

fn subject_density(model: &MeasurementModel, psi: &PureState) -> Result<(DensityMatrix, f64, f64)> {
    let amps = subject_amplitudes(model, psi)?;
    let ca = pointer_overlap(model, Which::Apparatus);
    let ce = pointer_overlap(model, Which::Environment);
    let d = model.subject_dim;
    let m = CMatrix::from_fn(d, d, |i, j| {
        let base = amps[i] * amps[j].conj();
        if i == j {
            base
        } else {
            base * ca * ce * model.phase(i, j)
        }
    });
    Ok((DensityMatrix::from_computed(psi.space().clone(), m)?, ca, ce))
}

fn best_outcome(v: &CVector) -> usize {
    // first index wins ties
    let mut best = 0;
    for (m, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() + 1e-12 {
            best = m;
        }
    }
    best
}

pub fn simulate_measurement(model: &MeasurementModel, psi: &PureState) -> Result<MeasurementOutcomeReport> {
    let (rho_s, overlap_a, overlap_e) = subject_density(model, psi)?;
    let amps = psi.amplitudes();
    let born_targets: Vec<f64> = amps.iter().map(|z| z.norm_sqr()).collect();
    let ontic = ontic_decomposition(&rho_s, tolerance::DEFAULT_DEGENERACY_GAP);

    let matched_outcomes: Vec<usize> = ontic
        .entries()
        .iter()
        .map(|e| best_outcome(e.state.amplitudes()))
        .collect();
    let max_born_deviation = ontic
        .entries()
        .iter()
        .zip(&matched_outcomes)
        .map(|(e, &m)| (e.probability - born_targets[m]).abs())
        .fold(0.0, f64::max);

    let d = model.subject_dim;
    let mut max_offdiag = 0.0_f64;
    let mut coherence_factor = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let v = rho_s.matrix()[(i, j)].norm();
            max_offdiag = max_offdiag.max(v);
            let scale = amps[i].norm() * amps[j].norm();
            if scale > 0.0 {
                coherence_factor = coherence_factor.max(v / scale);
            }
        }
    }

    Ok(MeasurementOutcomeReport {
        rho_s,
        ontic,
        born_targets,
        matched_outcomes,
        max_born_deviation,
        max_offdiag,
        coherence_factor,
        overlap_a,
        overlap_e,
    })
}

/// max_s |⟨s;Δt|ρ_S(Δt)|s;Δt⟩ − |Ψ_{m_s}|²|, evaluated through projector
/// traces rather than eigenvalues.
pub fn born_conditional_check(model: &MeasurementModel, psi: &PureState, delta_deg: f64) -> Result<f64> {
    let (rho_s, _, _) = subject_density(model, psi)?;
    let dec = ontic_decomposition(&rho_s, delta_deg);
    let amps = psi.amplitudes();
    Ok(dec
        .entries()
        .iter()
        .map(|e| {
            let p = linalg::trace_of_product(&e.projector, rho_s.matrix()).re;
            let m = best_outcome(e.state.amplitudes());
            (p - amps[m].norm_sqr()).abs()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub overlap_a: f64,
    pub overlap_e: f64,
    pub max_offdiag: f64,
    pub max_born_deviation: f64,
    pub s_max: f64,
    pub bound: f64,
}

/// Runs the template with N_A = N for each requested N; N_E and all rates
/// stay as in the template, so ln(max_offdiag) has slope −γ_AΔt in N.
pub fn decoherence_scaling_sweep(
    template: &MeasurementModel,
    psi: &PureState,
    n_values: &[usize],
) -> Result<Vec<SweepRow>> {
    n_values
        .par_iter()
        .map(|&n| {
            let model = template.with_factors(n, template.n_e);
            let report = simulate_measurement(&model, psi)?;
            let entropy = error_entropy_bound(&model, report.max_born_deviation);
            Ok(SweepRow {
                n,
                overlap_a: report.overlap_a,
                overlap_e: report.overlap_e,
                max_offdiag: report.max_offdiag,
                max_born_deviation: report.max_born_deviation,
                s_max: entropy.s_max,
                bound: entropy.bound,
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "N,overlap_A,overlap_E,max_offdiag,max_born_deviation,S_max,bound";

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            Num(r.overlap_a),
            Num(r.overlap_e),
            Num(r.max_offdiag),
            Num(r.max_born_deviation),
            Num(r.s_max),
            Num(r.bound)
        ));
    }
    out
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBoundReport {
    pub s_max: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// S_max = N_A ln 2 for qubit apparatus factors and bound = e^{−S_max}.
/// The bound is an order-of-magnitude floor, so `satisfied` only asks that
/// the observed error is not more than `slack` times below it.
pub fn error_entropy_bound_with_slack(
    model: &MeasurementModel,
    observed_deviation: f64,
    slack: f64,
) -> EntropyBoundReport {
    let s_max = model.n_a as f64 * std::f64::consts::LN_2;
    let bound = 2f64.powi(-(model.n_a as i32));
    let satisfied = observed_deviation >= 0.0 && observed_deviation >= bound / slack;
    EntropyBoundReport {
        s_max,
        bound,
        satisfied,
    }
}

pub fn error_entropy_bound(model: &MeasurementModel, observed_deviation: f64) -> EntropyBoundReport {
    error_entropy_bound_with_slack(model, observed_deviation, DEFAULT_ENTROPY_SLACK)
}

/// −Σ p ln p with 0 ln 0 = 0.
pub fn correlational_entropy(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::NotADistribution("empty distribution".into()));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -tolerance::derived()) {
        return Err(Error::NotADistribution(format!("entry {p} is negative")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tolerance::derived() {
        return Err(Error::NotADistribution(format!("entries sum to {sum}")));
    }
    Ok(probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum())
}

/// Builds Σ_m Ψ_m |m⟩ ⊗ |a_m⟩^{⊗N} explicitly, with d-dimensional pointer
/// factors whose pairwise overlaps are all `c`, and partial-traces the
/// pointers away. For d = 2 these are qubit factors.
pub fn materialized_subject_state(psi: &PureState, n: usize, c: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("overlap {c} outside [0,1]")));
    }
    let d = psi.dim();
    let total = d
        .checked_pow(n as u32 + 1)
        .filter(|&t| t <= MATERIALIZED_DIM_LIMIT)
        .ok_or_else(|| Error::InvalidParameter(format!("{d}^{} exceeds the materialization limit", n + 1)))?;

    // pointer vectors are the columns of G^{1/2}, G = (1−c)·1 + c·J
    let gram = CMatrix::from_fn(d, d, |i, j| Complex64::new(if i == j { 1.0 } else { c }, 0.0));
    let (values, vectors) = linalg::hermitian_eigen(&gram);
    let sqrt_diag = CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        values.iter().map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    let root = &vectors * sqrt_diag * vectors.adjoint();

    let mut amps = CVector::zeros(total);
    for m in 0..d {
        let pointer: CVector = root.column(m).into_owned();
        let mut branch = CVector::from_element(1, Complex64::new(1.0, 0.0));
        for _ in 0..n {
            branch = linalg::kron_vec(&branch, &pointer);
        }
        let mut ket_m = CVector::zeros(d);
        ket_m[m] = psi.amplitudes()[m];
        amps += linalg::kron_vec(&ket_m, &branch);
    }

    if n == 0 {
        return Ok(PureState::normalized(psi.space().clone(), amps)?.density());
    }
    let pointers = HilbertSpace::new((0..n).map(|k| (format!("pointer{k}"), d)))?;
    let state = PureState::normalized(psi.space().tensor(&pointers)?, amps)?;
    state.reduced(&psi.space().labels())
}
