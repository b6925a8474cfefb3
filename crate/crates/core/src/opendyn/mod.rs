//! Reduced dynamics beyond a fixed linear map on the subsystem.
//!
//! When S and E are correlated, Tr_E[𝓔_W{ρ_W}] depends on more than ρ_S.
//! This module conditions parent channels on an environment state, evaluates
//! subsystem transition probabilities given parent ontic states, tests
//! whether parent eigenprojectors factorize, and exhibits witness pairs:
//! parent states with equal S marginals whose evolved S marginals differ.

mod witness;

use serde::{Deserialize, Serialize};

pub use witness::{
    bell_vs_mixed, factorized_witness_channel, werner_pair, witness_channel, witness_library, WitnessPair,
    WITNESS_CHANNELS,
};

use crate::channels::{verify_cptp, CptpReport, QuantumChannel};
use crate::error::{Error, Result};
use crate::ontic::{ontic_decomposition, ConditionalProbabilityTable, SplitInfo};
use crate::qcore::linalg::{self, CMatrix, CVector};
use crate::qcore::{partial_trace, trace_distance, DensityMatrix, HilbertSpace};
use crate::tolerance;

/// Splits `ch_w`'s space into (S, E) and returns the channel with factors
/// regrouped S-first, along with both subspaces.
fn grouped(ch_w: &QuantumChannel, s_labels: &[&str]) -> Result<(QuantumChannel, HilbertSpace, HilbertSpace)> {
    let space = ch_w.in_space();
    if ch_w.out_space() != space {
        return Err(Error::SpaceMismatch(
            "parent channel must map its space to itself".into(),
        ));
    }
    let e_labels = space.complement(s_labels);
    space.check_partition(&[s_labels.to_vec(), e_labels.iter().map(String::as_str).collect()])?;
    let s_space = space.select(s_labels)?;
    let e_space = space.select(&e_labels)?;
    let ch = ch_w.reordered(&s_space.tensor(&e_space)?)?;
    Ok((ch, s_space, e_space))
}

/// Largest eigenvector of a rank-1 projector, or `NotAProjector`.
fn rank_one_vector(p: &CMatrix) -> Result<CVector> {
    let defect = projector_defect(p);
    let trace_defect = (linalg::trace(p).re - 1.0).abs();
    if defect > tolerance::derived() || trace_defect > tolerance::derived() {
        return Err(Error::NotAProjector {
            defect: defect.max(trace_defect),
        });
    }
    let (_, vectors) = linalg::hermitian_eigen(p);
    Ok(vectors.column(p.ncols() - 1).into_owned())
}

/// max |P² − P| together with the Hermiticity defect.
fn projector_defect(p: &CMatrix) -> f64 {
    if !p.is_square() {
        return f64::INFINITY;
    }
    linalg::max_abs(&(p * p - p)).max(linalg::hermiticity_defect(p))
}

/// X ↦ Tr_E[𝓔_W{X ⊗ P_E}] for a rank-1 environment projector `p_e`, given
/// on the environment factors in their parent order.
///
/// The map is returned unchecked with its CPTP report; trace preservation
/// holds whenever `ch_w` is trace-preserving.
pub fn conditional_channel_given_env(
    ch_w: &QuantumChannel,
    p_e: &CMatrix,
    s_labels: &[&str],
) -> Result<(QuantumChannel, CptpReport)> {
    let (ch, s_space, e_space) = grouped(ch_w, s_labels)?;
    let (ds, de) = (s_space.total_dim(), e_space.total_dim());
    if p_e.nrows() != de {
        return Err(Error::SpaceMismatch(format!(
            "environment projector is {}×{}, expected {de}",
            p_e.nrows(),
            p_e.ncols()
        )));
    }
    let phi = rank_one_vector(p_e)?;

    let mut kraus = Vec::with_capacity(ch.kraus().len() * de);
    for k in ch.kraus() {
        // K (1_S ⊗ |φ⟩): (ds·de) × ds
        let lifted = CMatrix::from_fn(ds * de, ds, |row, s| {
            (0..de).map(|f| k[(row, s * de + f)] * phi[f]).sum()
        });
        for e_out in 0..de {
            let m = CMatrix::from_fn(ds, ds, |s_out, s| lifted[(s_out * de + e_out, s)]);
            if linalg::frobenius(&m) >= tolerance::KRAUS_PRUNE {
                kraus.push(m);
            }
        }
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(ds, ds));
    }
    let conditioned = QuantumChannel::new_unchecked(s_space.clone(), s_space, kraus)?;
    let report = verify_cptp(&conditioned);
    Ok((conditioned, report))
}

/// p(s′;t′|w;t) = Tr[(P_S(s′;t′) ⊗ 1_E) 𝓔_W{P_W(w;t)}], with the S ontic
/// states taken from the reduced state of 𝓔_W{ρ_W(t)}.
pub fn parent_conditioned_probabilities(
    ch_w: &QuantumChannel,
    rho_w_t: &DensityMatrix,
    s_split: &[&str],
    delta_deg: f64,
) -> Result<ConditionalProbabilityTable> {
    rho_w_t.require_space(ch_w.in_space())?;
    let space = ch_w.out_space();
    let e_labels = space.complement(s_split);
    space.check_partition(&[s_split.to_vec(), e_labels.iter().map(String::as_str).collect()])?;
    let keep = space.positions_of(s_split)?;
    let dims = space.dims();

    let rho_out = crate::channels::apply(ch_w, rho_w_t)?;
    let s_dec = ontic_decomposition(&partial_trace(&rho_out, s_split)?, delta_deg);
    let s_basis = s_dec.basis();
    let parent = ontic_decomposition(rho_w_t, delta_deg);

    let values = parent
        .entries()
        .iter()
        .map(|entry| {
            let reduced = linalg::partial_trace_raw(&ch_w.apply_operator(&entry.projector), &dims, &keep);
            let rv = &reduced * &s_basis;
            (0..s_basis.ncols())
                .map(|t| s_basis.column(t).dotc(&rv.column(t)).re)
                .collect()
        })
        .collect();
    let split = SplitInfo {
        labels: space.select(s_split)?.labels().iter().map(|s| s.to_string()).collect(),
        dim: s_basis.ncols(),
    };
    ConditionalProbabilityTable::from_computed(Some(parent.probabilities()), vec![split], values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub factorizes: bool,
    /// Frobenius residual ‖P_W − P_S ⊗ P_E‖ of the best candidate.
    pub defect: f64,
    pub candidate_s: CMatrix,
    pub candidate_e: CMatrix,
}

/// Projector onto the eigenvectors of `m` with eigenvalue above `floor`.
fn range_projector(m: &CMatrix, floor: f64) -> CMatrix {
    let (values, vectors) = linalg::hermitian_eigen(m);
    let d = m.nrows();
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > floor)
        .fold(CMatrix::zeros(d, d), |acc, (k, _)| {
            acc + linalg::outer(&vectors.column(k).into_owned())
        })
}

/// Whether `p_w` equals P_S ⊗ P_E for some projectors. Two candidate pairs
/// are tried, the normalized partial traces Tr_E[P]/r and Tr_S[P]/r
/// (exact for rank-1 products) and the projectors onto their ranges (exact
/// for any product); the smaller residual is reported.
pub fn projector_factorization_check(
    p_w: &CMatrix,
    space: &HilbertSpace,
    s_labels: &[&str],
) -> Result<FactorizationReport> {
    if p_w.nrows() != space.total_dim() {
        return Err(Error::SpaceMismatch(format!("projector does not act on {space}")));
    }
    let defect = projector_defect(p_w);
    if defect > tolerance::derived() {
        return Err(Error::NotAProjector { defect });
    }
    let e_labels = space.complement(s_labels);
    space.check_partition(&[s_labels.to_vec(), e_labels.iter().map(String::as_str).collect()])?;
    let order = space.grouped_order(&[s_labels.to_vec(), e_labels.iter().map(String::as_str).collect()])?;
    let dims = space.dims();
    let p = linalg::permute_factors(p_w, &dims, &order);
    let grouped_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let ns = s_labels.len();
    let s_keep: Vec<usize> = (0..ns).collect();
    let e_keep: Vec<usize> = (ns..grouped_dims.len()).collect();

    let rank = linalg::trace(&p).re.round().max(1.0);
    let ps = linalg::partial_trace_raw(&p, &grouped_dims, &s_keep).unscale(rank);
    let pe = linalg::partial_trace_raw(&p, &grouped_dims, &e_keep).unscale(rank);
    let candidates = [
        (ps.clone(), pe.clone()),
        (range_projector(&ps, 1e-8), range_projector(&pe, 1e-8)),
    ];
    let (defect, candidate_s, candidate_e) = candidates
        .into_iter()
        .map(|(a, b)| (linalg::frobenius(&(&p - linalg::kron(&a, &b))), a, b))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("two candidates");
    Ok(FactorizationReport {
        factorizes: defect <= 1e-8,
        defect,
        candidate_s,
        candidate_e,
    })
}

#[derive(Debug, Clone)]
pub struct NonlinearityWitnessReport {
    pub rho_w_pair: (DensityMatrix, DensityMatrix),
    pub marginal_distance_before: f64,
    pub reduced_distance_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub distance_before: f64,
    pub distance_after: f64,
    pub channel: String,
    pub pair_id: String,
}

impl NonlinearityWitnessReport {
    pub fn to_json(&self, channel: &str, pair_id: &str) -> WitnessJson {
        WitnessJson {
            distance_before: self.marginal_distance_before,
            distance_after: self.reduced_distance_after,
            channel: channel.to_string(),
            pair_id: pair_id.to_string(),
        }
    }
}

/// Evolves two parents with equal S marginals and compares the evolved S
/// marginals. A nonzero distance means no map on ρ_S alone reproduces the
/// reduced dynamics.
pub fn nonlinearity_witness(
    ch_w: &QuantumChannel,
    rho_w_1: &DensityMatrix,
    rho_w_2: &DensityMatrix,
    s_labels: &[&str],
) -> Result<NonlinearityWitnessReport> {
    let before = trace_distance(&partial_trace(rho_w_1, s_labels)?, &partial_trace(rho_w_2, s_labels)?)?;
    if before > tolerance::derived() {
        return Err(Error::NotAWitnessPair { distance: before });
    }
    let out1 = crate::channels::apply(ch_w, rho_w_1)?;
    let out2 = crate::channels::apply(ch_w, rho_w_2)?;
    let after = trace_distance(&partial_trace(&out1, s_labels)?, &partial_trace(&out2, s_labels)?)?;
    Ok(NonlinearityWitnessReport {
        rho_w_pair: (rho_w_1.clone(), rho_w_2.clone()),
        marginal_distance_before: before,
        reduced_distance_after: after,
    })
}

#[cfg(test)]
mod tests;
