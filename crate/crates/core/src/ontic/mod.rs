//! Ontic decompositions and quantum conditional probabilities.
//!
//! The possible ontic states of a system are the eigenvectors of its density
//! matrix. For a parent channel 𝓔_W and parent state ρ_W(t), the conditional
//! probability of subsystem ontic states (i₁…iₙ) at t′ given parent ontic
//! state w at t is
//!
//! ```text
//! p(i₁…iₙ; t′ | w; t) = Tr[(P_{Q₁}(i₁;t′) ⊗ … ⊗ P_{Qₙ}(iₙ;t′)) 𝓔_W{P_W(w;t)}]
//! ```
//!
//! where the subsystem projectors come from the reduced states of
//! 𝓔_W{ρ_W(t)}.

mod decomposition;
mod table;

use rayon::prelude::*;

pub use decomposition::{ontic_decomposition, OnticDecomposition, OnticEntry};
pub use table::{ConditionalProbabilityTable, SplitInfo, TableJson};

use crate::channels::{apply, QuantumChannel};
use crate::error::{Error, Result};
use crate::qcore::linalg::{self, CMatrix};
use crate::qcore::{partial_trace, DensityMatrix};
use crate::tolerance;

/// Everything computed along the way to a conditional table; kept together so
/// the Bayesian check can reuse the evolved subsystem decompositions.
struct Evaluation {
    parent: OnticDecomposition,
    subsystems: Vec<OnticDecomposition>,
    table: ConditionalProbabilityTable,
}

fn evaluate(
    ch_w: &QuantumChannel,
    rho_w_t: &DensityMatrix,
    splits: &[Vec<&str>],
    delta_deg: f64,
) -> Result<Evaluation> {
    rho_w_t.require_space(ch_w.in_space())?;
    let out_space = ch_w.out_space();
    let order = out_space.grouped_order(splits)?;
    let dims = out_space.dims();

    let parent = ontic_decomposition(rho_w_t, delta_deg);
    let rho_out = apply(ch_w, rho_w_t)?;

    let mut subsystems = Vec::with_capacity(splits.len());
    let mut split_info = Vec::with_capacity(splits.len());
    for split in splits {
        let reduced = if split.len() == out_space.factors().len() {
            rho_out.clone()
        } else {
            partial_trace(&rho_out, split)?
        };
        split_info.push(SplitInfo {
            labels: reduced.space().labels().iter().map(|s| s.to_string()).collect(),
            dim: reduced.dim(),
        });
        subsystems.push(ontic_decomposition(&reduced, delta_deg));
    }

    // Columns of `product_basis` enumerate (i₁,…,iₙ) with i₁ most significant,
    // expressed in the split-grouped factor order.
    let product_basis = subsystems
        .iter()
        .map(OnticDecomposition::basis)
        .reduce(|acc, b| linalg::kron(&acc, &b))
        .ok_or(Error::EmptySelection)?;

    let values: Vec<Vec<f64>> = parent
        .entries()
        .par_iter()
        .map(|entry| {
            let evolved = ch_w.apply_operator(&entry.projector);
            let grouped = linalg::permute_factors(&evolved, &dims, &order);
            column_expectations(&grouped, &product_basis)
        })
        .collect();

    let parent_probabilities = parent.probabilities();
    let table = ConditionalProbabilityTable::from_computed(Some(parent_probabilities), split_info, values)?;
    Ok(Evaluation {
        parent,
        subsystems,
        table,
    })
}

/// diag(V† X V), real parts.
fn column_expectations(x: &CMatrix, v: &CMatrix) -> Vec<f64> {
    let xv = x * v;
    (0..v.ncols()).map(|t| v.column(t).dotc(&xv.column(t)).re).collect()
}

/// Joint conditional probabilities for the subsystems listed in `splits`,
/// which must partition the channel's output labels.
pub fn conditional_probabilities(
    ch_w: &QuantumChannel,
    rho_w_t: &DensityMatrix,
    splits: &[Vec<&str>],
    delta_deg: f64,
) -> Result<ConditionalProbabilityTable> {
    evaluate(ch_w, rho_w_t, splits, delta_deg).map(|e| e.table)
}

/// p(s′;t′|s;t) for a single system (the whole output space as one split).
pub fn single_system_conditional(
    ch: &QuantumChannel,
    rho_t: &DensityMatrix,
    delta_deg: f64,
) -> Result<ConditionalProbabilityTable> {
    let all = ch.out_space().labels();
    conditional_probabilities(ch, rho_t, &[all], delta_deg)
}

/// Max over i₁ of |p(i₁;t′) − Σ_{i₂…,w} p(i₁,i₂…|w;t) p(w;t)|, where the first
/// term is evaluated directly as Tr[(P_{Q₁}(i₁) ⊗ 1) ρ_W(t′)].
pub fn bayesian_propagation_check(
    ch_w: &QuantumChannel,
    rho_w_t: &DensityMatrix,
    splits: &[Vec<&str>],
    delta_deg: f64,
) -> Result<f64> {
    let eval = evaluate(ch_w, rho_w_t, splits, delta_deg)?;
    let rho_out = apply(ch_w, rho_w_t)?;
    let first = &eval.subsystems[0];
    let reduced = if splits[0].len() == ch_w.out_space().factors().len() {
        rho_out
    } else {
        partial_trace(&rho_out, &splits[0])?
    };
    let stride: usize = eval.table.split_dims()[1..].iter().product();
    let weights = eval.parent.probabilities();

    let mut worst = 0.0_f64;
    for (i1, entry) in first.entries().iter().enumerate() {
        let direct = linalg::trace_of_product(&entry.projector, reduced.matrix()).re;
        let propagated: f64 = eval
            .table
            .values()
            .iter()
            .zip(&weights)
            .map(|(row, pw)| row[i1 * stride..(i1 + 1) * stride].iter().sum::<f64>() * pw)
            .sum();
        worst = worst.max((direct - propagated).abs());
    }
    Ok(worst)
}

/// Tr[AB] for positive-semidefinite A and B; non-negative up to rounding.
pub fn psd_pairing_check(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::SpaceMismatch("operands must be square and equally sized".into()));
    }
    for m in [a, b] {
        let herm = linalg::hermiticity_defect(m);
        if herm > tolerance::construction() {
            return Err(Error::NotPSD {
                min_eigenvalue: f64::NAN,
            });
        }
        let min = linalg::min_eigenvalue(m);
        if min < -tolerance::psd_floor() {
            return Err(Error::NotPSD { min_eigenvalue: min });
        }
    }
    Ok(linalg::trace_of_product(a, b).re)
}

#[cfg(test)]
mod tests;
