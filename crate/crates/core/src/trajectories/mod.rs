//! Ontic trajectories on discrete time grids.
//!
//! Exact (fine-grained) ontic trajectories carry no probability measure, so
//! nothing here samples them. The only measure-bearing object is a
//! [`MarkovKernelChain`]: coarse-grained transition kernels whose product
//! gives the probability of a whole index sequence.
//!
//! Ontic indices are 0-based throughout.

mod helix;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use helix::{bloch_helix, bloch_state, helix_to_csv, BlochPoint, Helix};

use crate::channels::{apply, dilation_channel, unitary_channel, QuantumChannel, UnitaryFamily, UnitaryOperator};
use crate::error::{Error, Result};
use crate::ontic::{single_system_conditional, ConditionalProbabilityTable};
use crate::qcore::json::Num;
use crate::qcore::linalg::{self, CMatrix, CVector};
use crate::qcore::{DensityMatrix, PureState};
use crate::tolerance;

/// Largest N^M that [`enumerate_trajectory_measure`] will expand.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OnticTrajectory {
    times: Vec<f64>,
    indices: Vec<usize>,
    frames: Option<Vec<CMatrix>>,
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::GridMismatch("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::GridMismatch("non-finite time".into()));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::GridMismatch(format!(
            "times not strictly increasing at {} → {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl OnticTrajectory {
    pub fn new(times: Vec<f64>, indices: Vec<usize>, frames: Option<Vec<CMatrix>>) -> Result<Self> {
        check_grid(&times)?;
        if indices.len() != times.len() {
            return Err(Error::GridMismatch(format!(
                "{} indices for {} times",
                indices.len(),
                times.len()
            )));
        }
        if let Some(frames) = &frames {
            if frames.len() != times.len() {
                return Err(Error::GridMismatch(format!(
                    "{} frames for {} times",
                    frames.len(),
                    times.len()
                )));
            }
            for (k, f) in frames.iter().enumerate() {
                if !f.is_square() || indices[k] >= f.ncols() {
                    return Err(Error::InvalidParameter(format!(
                        "frame {k} does not cover index {}",
                        indices[k]
                    )));
                }
                let defect = linalg::max_abs(&(f.adjoint() * f - linalg::identity(f.ncols())));
                if defect > tolerance::derived() {
                    return Err(Error::InvalidParameter(format!(
                        "frame {k} not orthonormal ({defect:.2e})"
                    )));
                }
            }
        }
        Ok(Self { times, indices, frames })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn frames(&self) -> Option<&[CMatrix]> {
        self.frames.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of steps at which the index changes.
    pub fn jumps(&self) -> usize {
        self.indices.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,index\n");
        for (t, i) in self.times.iter().zip(&self.indices) {
            let _ = writeln!(out, "{},{i}", Num(*t));
        }
        out
    }
}

/// Kernel k maps ontic indices at `times[k]` to those at `times[k + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernelChain {
    times: Vec<f64>,
    kernels: Vec<ConditionalProbabilityTable>,
}

impl MarkovKernelChain {
    /// `times` is the full grid t₀…t_M, one entry longer than `kernels`.
    pub fn new(times: Vec<f64>, kernels: Vec<ConditionalProbabilityTable>) -> Result<Self> {
        check_grid(&times)?;
        if times.len() != kernels.len() + 1 {
            return Err(Error::GridMismatch(format!(
                "{} kernels need {} times, got {}",
                kernels.len(),
                kernels.len() + 1,
                times.len()
            )));
        }
        for (k, kernel) in kernels.iter().enumerate() {
            if kernel.splits().len() != 1 {
                return Err(Error::InvalidParameter(format!("kernel {k} is not single-system")));
            }
            if kernel.min_value() < -tolerance::derived() || kernel.max_row_sum_defect() > tolerance::row_sum() {
                return Err(Error::NotADistribution(format!("kernel {k} is not row-stochastic")));
            }
            if k > 0 && kernels[k - 1].cols() != kernel.rows() {
                return Err(Error::GridMismatch(format!(
                    "kernel {} has {} columns but kernel {k} has {} rows",
                    k - 1,
                    kernels[k - 1].cols(),
                    kernel.rows()
                )));
            }
        }
        Ok(Self { times, kernels })
    }

    /// Same kernel at every step of a uniform grid starting at 0.
    pub fn homogeneous(kernel: ConditionalProbabilityTable, dt: f64, steps: usize) -> Result<Self> {
        let times = (0..=steps).map(|k| k as f64 * dt).collect();
        Self::new(times, vec![kernel; steps])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kernels(&self) -> &[ConditionalProbabilityTable] {
        &self.kernels
    }

    pub fn steps(&self) -> usize {
        self.kernels.len()
    }

    fn states_at(&self, k: usize) -> usize {
        if k == 0 {
            self.kernels.first().map_or(0, |c| c.rows())
        } else {
            self.kernels[k - 1].cols()
        }
    }
}

/// Π_n p(i_n; t_n | i_{n−1}; t_{n−1}).
pub fn trajectory_probability(traj: &OnticTrajectory, chain: &MarkovKernelChain) -> Result<f64> {
    let same_grid = traj.times.len() == chain.times.len()
        && traj
            .times
            .iter()
            .zip(&chain.times)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    if !same_grid {
        return Err(Error::GridMismatch(
            "trajectory and chain use different time grids".into(),
        ));
    }
    path_probability(&traj.indices, chain)
}

fn path_probability(indices: &[usize], chain: &MarkovKernelChain) -> Result<f64> {
    for (k, &i) in indices.iter().enumerate() {
        if i >= chain.states_at(k) {
            return Err(Error::InvalidParameter(format!("index {i} out of range at step {k}")));
        }
    }
    Ok(chain
        .kernels
        .iter()
        .zip(indices.windows(2))
        .map(|(kernel, w)| kernel.value(w[0], &[w[1]]))
        .product())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryWeight {
    pub indices: Vec<usize>,
    pub p: f64,
}

/// Every index sequence from a fixed start, with its probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeasure {
    pub times: Vec<f64>,
    pub trajectories: Vec<TrajectoryWeight>,
}

impl TrajectoryMeasure {
    pub fn total(&self) -> f64 {
        self.trajectories.iter().map(|t| t.p).sum()
    }

    pub fn probability_of(&self, indices: &[usize]) -> Option<f64> {
        self.trajectories.iter().find(|t| t.indices == indices).map(|t| t.p)
    }
}

/// Expands all N^M sequences starting at `initial_index`, in lexicographic
/// order.
pub fn enumerate_trajectory_measure(
    chain: &MarkovKernelChain,
    n: usize,
    initial_index: usize,
) -> Result<TrajectoryMeasure> {
    let m = chain.steps();
    for k in 0..=m {
        if chain.states_at(k) != n {
            return Err(Error::GridMismatch(format!(
                "chain has {} states at step {k}, expected {n}",
                chain.states_at(k)
            )));
        }
    }
    if initial_index >= n {
        return Err(Error::InvalidParameter(format!("initial index {initial_index} ≥ {n}")));
    }
    let count = (n as f64).powi(m as i32);
    if count > ENUMERATION_LIMIT as f64 {
        return Err(Error::TooManyTrajectories {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }

    let total = count as usize;
    let mut trajectories = Vec::with_capacity(total);
    let mut path = vec![initial_index; m + 1];
    for code in 0..total {
        let mut rest = code;
        for slot in path[1..].iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        trajectories.push(TrajectoryWeight {
            indices: path.clone(),
            p: path_probability(&path, chain)?,
        });
    }
    Ok(TrajectoryMeasure {
        times: chain.times.clone(),
        trajectories,
    })
}

fn draw(row: &[f64], u: f64) -> usize {
    let total: f64 = row.iter().map(|v| v.max(0.0)).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_live = 0;
    for (k, v) in row.iter().enumerate() {
        let v = v.max(0.0);
        if v > 0.0 {
            last_live = k;
        }
        acc += v;
        if target < acc {
            return k;
        }
    }
    last_live
}

/// Trajectory drawn on the RNG stream `trajectory_id` of `seed`.
pub fn sample_trajectory_with_id(
    chain: &MarkovKernelChain,
    initial_index: usize,
    seed: u64,
    trajectory_id: u64,
) -> Result<OnticTrajectory> {
    if initial_index >= chain.states_at(0) {
        return Err(Error::InvalidParameter(format!(
            "initial index {initial_index} out of range"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory_id);
    let mut indices = Vec::with_capacity(chain.steps() + 1);
    indices.push(initial_index);
    for kernel in &chain.kernels {
        let current = *indices.last().expect("nonempty");
        let u: f64 = rng.random();
        indices.push(draw(&kernel.values()[current], u));
    }
    OnticTrajectory::new(chain.times.clone(), indices, None)
}

pub fn sample_trajectory(chain: &MarkovKernelChain, initial_index: usize, seed: u64) -> Result<OnticTrajectory> {
    sample_trajectory_with_id(chain, initial_index, seed, 0)
}

/// `count` independent trajectories; trajectory k uses stream k, so the
/// result does not depend on thread scheduling.
pub fn sample_trajectories(
    chain: &MarkovKernelChain,
    initial_index: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<OnticTrajectory>> {
    (0..count as u64)
        .into_par_iter()
        .map(|id| sample_trajectory_with_id(chain, initial_index, seed, id))
        .collect()
}

/// Occurrence count of each index sequence.
pub fn trajectory_counts(samples: &[OnticTrajectory]) -> BTreeMap<Vec<usize>, usize> {
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(s.indices.clone()).or_insert(0) += 1;
    }
    counts
}

/// Kernels, per-step channel and subject states of a repeated-interaction model.
#[derive(Debug, Clone)]
pub struct RepeatedInteraction {
    pub chain: MarkovKernelChain,
    pub step_channel: QuantumChannel,
    /// ρ_S(t₀) … ρ_S(t_M)
    pub states: Vec<DensityMatrix>,
}

/// Each step couples S to a fresh copy of `rho_e_fresh` through
/// exp(−i h_int Δt) on S ⊗ E and traces E out, so the per-step channels
/// compose exactly.
pub fn markov_chain_from_repeated_interaction(
    h_int: &CMatrix,
    rho_e_fresh: &DensityMatrix,
    rho_s0: &DensityMatrix,
    step: f64,
    steps: usize,
    delta_deg: f64,
) -> Result<RepeatedInteraction> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let w = rho_s0.space().tensor(rho_e_fresh.space())?;
    if h_int.nrows() != w.total_dim() || !h_int.is_square() {
        return Err(Error::SpaceMismatch(format!(
            "generator is {}×{}, expected {} for {w}",
            h_int.nrows(),
            h_int.ncols(),
            w.total_dim()
        )));
    }
    let u = UnitaryOperator::evolution(w, h_int, step)?;
    let s_labels = rho_s0.space().labels();
    let e_labels = rho_e_fresh.space().labels();
    let step_channel = dilation_channel(&u, rho_e_fresh, &s_labels, &e_labels)?;

    let mut states = vec![rho_s0.clone()];
    let mut kernels = Vec::with_capacity(steps);
    for _ in 0..steps {
        let current = states.last().expect("nonempty");
        kernels.push(single_system_conditional(&step_channel, current, delta_deg)?);
        let next = apply(&step_channel, current)?;
        states.push(next);
    }
    let times = (0..=steps).map(|k| k as f64 * step).collect();
    Ok(RepeatedInteraction {
        chain: MarkovKernelChain::new(times, kernels)?,
        step_channel,
        states,
    })
}

/// Orthonormal frame whose first column is `v`, completed by Gram–Schmidt
/// against the standard basis in index order.
pub fn completed_frame(v: &CVector) -> CMatrix {
    let d = v.len();
    let mut cols: Vec<CVector> = vec![v.normalize()];
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut r = CVector::zeros(d);
        r[k] = linalg::ONE;
        // two passes keep the result orthonormal to rounding
        for _ in 0..2 {
            for c in &cols {
                let overlap = c.dotc(&r);
                r -= c * overlap;
            }
        }
        let norm = r.norm();
        if norm > 1e-6 {
            cols.push(r.unscale(norm));
        }
    }
    CMatrix::from_columns(&cols)
}

/// The trajectory that follows U(t)|ψ₀⟩: index 0 at every time, with frames
/// built by [`completed_frame`].
pub fn closed_system_trajectory(
    family: &dyn UnitaryFamily,
    psi0: &PureState,
    times: &[f64],
) -> Result<OnticTrajectory> {
    if psi0.space() != family.space() {
        return Err(Error::SpaceMismatch(
            "initial state and family act on different spaces".into(),
        ));
    }
    let frames = times
        .iter()
        .map(|&t| Ok(completed_frame(&(family.at(t)?.matrix() * psi0.amplitudes()))))
        .collect::<Result<Vec<_>>>()?;
    OnticTrajectory::new(times.to_vec(), vec![0; times.len()], Some(frames))
}

/// Kernels of the unitary channels U(t_k)U(t_{k−1})† applied to the evolving
/// pure state.
pub fn closed_system_chain(
    family: &dyn UnitaryFamily,
    psi0: &PureState,
    times: &[f64],
    delta_deg: f64,
) -> Result<MarkovKernelChain> {
    check_grid(times)?;
    let mut kernels = Vec::with_capacity(times.len().saturating_sub(1));
    let mut rho = psi0.density();
    let mut prev = family.at(times[0])?;
    for &t in &times[1..] {
        let next = family.at(t)?;
        let segment = next.then_after(&prev.adjoint())?;
        let ch = unitary_channel(&segment);
        kernels.push(single_system_conditional(&ch, &rho, delta_deg)?);
        rho = apply(&ch, &rho)?;
        prev = next;
    }
    MarkovKernelChain::new(times.to_vec(), kernels)
}
