use std::cmp::Ordering;

use crate::qcore::linalg::{self, CMatrix, CVector};
use crate::qcore::{DensityMatrix, HilbertSpace, PureState};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct OnticEntry {
    pub probability: f64,
    pub state: PureState,
    pub projector: CMatrix,
    /// Probability below the null threshold; kept so bases stay complete.
    pub null: bool,
}

/// Spectral decomposition ρ = Σ pᵢ |Ψᵢ⟩⟨Ψᵢ| ordered by descending probability.
#[derive(Debug, Clone, PartialEq)]
pub struct OnticDecomposition {
    source_space: HilbertSpace,
    entries: Vec<OnticEntry>,
    degeneracy_groups: Vec<Vec<usize>>,
    degeneracy_gap: f64,
}

impl OnticDecomposition {
    pub fn source_space(&self) -> &HilbertSpace {
        &self.source_space
    }

    pub fn entries(&self) -> &[OnticEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    /// Index sets (size ≥ 2) of entries whose probabilities are chained by
    /// gaps smaller than the degeneracy threshold.
    pub fn degeneracy_groups(&self) -> &[Vec<usize>] {
        &self.degeneracy_groups
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degeneracy_groups.is_empty()
    }

    pub fn degeneracy_gap(&self) -> f64 {
        self.degeneracy_gap
    }

    /// Unitary whose columns are the ontic states in entry order.
    pub fn basis(&self) -> CMatrix {
        let d = self.source_space.total_dim();
        let mut m = CMatrix::zeros(d, self.entries.len());
        for (k, e) in self.entries.iter().enumerate() {
            m.set_column(k, e.state.amplitudes());
        }
        m
    }

    /// Σ pᵢ Pᵢ.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.source_space.total_dim();
        self.entries
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, e| acc + e.projector.scale(e.probability))
    }

    /// Max |⟨Ψᵢ|Ψⱼ⟩ − δᵢⱼ|.
    pub fn orthonormality_defect(&self) -> f64 {
        let b = self.basis();
        linalg::max_abs(&(b.adjoint() * &b - linalg::identity(b.ncols())))
    }
}

/// Full eigendecomposition of `rho` sorted by descending probability.
///
/// Within a degeneracy group the eigenbasis is replaced by a canonical one
/// that depends only on the group's eigenspace: pivoted Gram–Schmidt of the
/// projected standard basis vectors, phase-fixed, then sorted by descending
/// lexicographic order of coordinates.
pub fn ontic_decomposition(rho: &DensityMatrix, delta_deg: f64) -> OnticDecomposition {
    let (values, vectors) = linalg::hermitian_eigen(rho.matrix());
    let d = values.len();
    // hermitian_eigen is ascending
    let mut probs: Vec<f64> = values.iter().rev().copied().collect();
    let mut vecs: Vec<CVector> = (0..d).rev().map(|i| vectors.column(i).into_owned()).collect();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut start = 0;
    for k in 1..=d {
        if k == d || (probs[k - 1] - probs[k]).abs() >= delta_deg {
            if k - start > 1 {
                groups.push((start..k).collect());
            }
            start = k;
        }
    }

    for v in vecs.iter_mut() {
        *v = linalg::canonical_phase(v, tolerance::PHASE);
    }
    for group in &groups {
        let canonical = canonical_subspace_basis(group.iter().map(|&i| &vecs[i]));
        // eigenvalues inside a group differ by less than δ_deg, so the
        // originals are kept and Σ p P reconstructs ρ to that accuracy
        for (&slot, v) in group.iter().zip(canonical) {
            vecs[slot] = v;
        }
    }

    let entries = probs
        .iter_mut()
        .zip(vecs)
        .map(|(p, v)| {
            let probability = p.clamp(0.0, 1.0);
            let state = PureState::normalized(rho.space().clone(), v).expect("eigenvector is nonzero");
            OnticEntry {
                probability,
                projector: state.projector(),
                null: probability < tolerance::NULL_PROBABILITY,
                state,
            }
        })
        .collect();

    OnticDecomposition {
        source_space: rho.space().clone(),
        entries,
        degeneracy_groups: groups,
        degeneracy_gap: delta_deg,
    }
}

fn canonical_subspace_basis<'a>(span: impl Iterator<Item = &'a CVector>) -> Vec<CVector> {
    let span: Vec<&CVector> = span.collect();
    let d = span[0].len();
    let projector = span.iter().fold(CMatrix::zeros(d, d), |acc, v| acc + linalg::outer(v));

    let mut chosen: Vec<CVector> = Vec::with_capacity(span.len());
    while chosen.len() < span.len() {
        // residual of each projected basis vector against the chosen ones;
        // pick the largest, preferring the lowest index on near-ties
        let mut best: Option<(f64, CVector)> = None;
        for k in 0..d {
            let mut r: CVector = projector.column(k).into_owned();
            for c in &chosen {
                let overlap = c.dotc(&r);
                r -= c * overlap;
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b + 1e-9) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("dimension is nonzero");
        chosen.push(linalg::canonical_phase(&r.unscale(norm), tolerance::PHASE));
    }
    chosen.sort_by(lexicographic_descending);
    chosen
}

fn lexicographic_descending(a: &CVector, b: &CVector) -> Ordering {
    const TIE: f64 = 1e-12;
    for (x, y) in a.iter().zip(b.iter()) {
        for (u, v) in [(x.re, y.re), (x.im, y.im)] {
            if (u - v).abs() > TIE {
                return v.total_cmp(&u);
            }
        }
    }
    Ordering::Equal
}
