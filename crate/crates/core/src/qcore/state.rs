use num_complex::Complex64;

use super::linalg::{self, CMatrix, CVector};
use super::space::HilbertSpace;
use crate::error::{Error, Result};
use crate::tolerance;

/// A normalized state vector with its global phase fixed: the first amplitude
/// of significant magnitude is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: HilbertSpace,
    amplitudes: CVector,
}

impl PureState {
    /// Validates the norm and canonicalizes the global phase.
    pub fn new(space: HilbertSpace, amplitudes: CVector) -> Result<Self> {
        check_len(&space, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tolerance::construction() {
            return Err(Error::InvalidState(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self::canonical(space, amplitudes))
    }

    /// Rescales `amplitudes` to unit norm first.
    pub fn normalized(space: HilbertSpace, amplitudes: CVector) -> Result<Self> {
        check_len(&space, amplitudes.len())?;
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        Ok(Self::canonical(space, amplitudes.unscale(norm)))
    }

    pub fn from_slice(space: HilbertSpace, amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(space, CVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `index`.
    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        let dim = space.total_dim();
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = linalg::ONE;
        Ok(Self { space, amplitudes: v })
    }

    fn canonical(space: HilbertSpace, amplitudes: CVector) -> Self {
        let amplitudes = linalg::canonical_phase(&amplitudes, tolerance::PHASE);
        Self { space, amplitudes }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        linalg::outer(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space.clone(),
            matrix: self.projector(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let space = self.space.tensor(&other.space)?;
        let amplitudes = linalg::kron_vec(&self.amplitudes, &other.amplitudes);
        Ok(Self::canonical(space, amplitudes))
    }

    /// Reduced density matrix on `keep`, computed from the amplitudes without
    /// forming the full projector.
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let keep_pos = trace_positions(&self.space, keep)?;
        let dims = self.space.dims();
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_pos.contains(i)).collect();
        let mut order = keep_pos.clone();
        order.extend(&traced);
        let v = linalg::permute_vector(&self.amplitudes, &dims, &order);
        let kept_dim: usize = keep_pos.iter().map(|&i| dims[i]).product();
        let traced_dim = v.len() / kept_dim;
        // row-major reshape: row = kept index, column = traced index
        let m = CMatrix::from_fn(kept_dim, traced_dim, |i, j| v[i * traced_dim + j]);
        let space = self.space.select(keep)?;
        DensityMatrix::from_computed(space, &m * m.adjoint())
    }
}

/// Hermitian, positive-semidefinite, unit-trace operator on a labeled space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at construction
    /// tolerance.
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        check_square(&space, &matrix)?;
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > tolerance::construction() {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let matrix = linalg::hermitize(&matrix);
        check_trace_and_psd(&matrix, tolerance::construction())?;
        Ok(Self { space, matrix })
    }

    /// For matrices produced by arithmetic on valid states: hermitizes, then
    /// checks trace and positivity at the derived-quantity tolerance.
    pub fn from_computed(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        check_square(&space, &matrix)?;
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > tolerance::derived() {
            return Err(Error::ToleranceBreach(format!(
                "computed state not Hermitian (defect {herm:.3e})"
            )));
        }
        let matrix = linalg::hermitize(&matrix);
        check_trace_and_psd(&matrix, tolerance::derived()).map_err(|e| match e {
            Error::InvalidState(msg) => Error::ToleranceBreach(format!("computed state: {msg}")),
            other => other,
        })?;
        Ok(Self { space, matrix })
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            matrix: linalg::identity(d).unscale(d as f64),
            space,
        }
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(space: HilbertSpace, probs: &[f64]) -> Result<Self> {
        check_len(&space, probs.len())?;
        let m = CMatrix::from_fn(probs.len(), probs.len(), |i, j| {
            if i == j {
                linalg::c(probs[i], 0.0)
            } else {
                linalg::ZERO
            }
        });
        Self::new(space, m)
    }

    /// Convex combination Σ w_k ρ_k over a common space.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptySelection)?.1;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            rho.require_space(&first.space)?;
            if *w < 0.0 {
                return Err(Error::InvalidParameter("negative mixture weight".into()));
            }
            m += rho.matrix.scale(*w);
        }
        Self::new(first.space.clone(), m)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.matrix).0
    }

    pub fn require_space(&self, space: &HilbertSpace) -> Result<()> {
        if &self.space != space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, space)));
        }
        Ok(())
    }

    /// The same state with its factors permuted into `target`'s order.
    pub fn reordered(&self, target: &HilbertSpace) -> Result<Self> {
        let order = self.space.order_for(target)?;
        let matrix = linalg::permute_factors(&self.matrix, &self.space.dims(), &order);
        Ok(Self {
            space: target.clone(),
            matrix,
        })
    }
}

/// The trace-free remainder ρ_W − ρ_S ⊗ ρ_E of a bipartitioned state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationOperator {
    pub space: HilbertSpace,
    pub s_labels: Vec<String>,
    pub e_labels: Vec<String>,
    pub matrix: CMatrix,
}

impl CorrelationOperator {
    /// Max-entry norms of Tr_E[σ] and Tr_S[σ].
    pub fn partial_trace_defects(&self) -> (f64, f64) {
        let dims = self.space.dims();
        let s = self.space.positions_of(&self.s_labels).expect("validated");
        let e = self.space.positions_of(&self.e_labels).expect("validated");
        (
            linalg::max_abs(&linalg::partial_trace_raw(&self.matrix, &dims, &s)),
            linalg::max_abs(&linalg::partial_trace_raw(&self.matrix, &dims, &e)),
        )
    }
}

/// Kronecker product of two states on disjoint spaces.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let space = a.space.tensor(&b.space)?;
    Ok(DensityMatrix {
        space,
        matrix: linalg::kron(&a.matrix, &b.matrix),
    })
}

/// Reduced state on `keep`; kept factors retain their relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    let keep_pos = trace_positions(&rho.space, keep)?;
    let m = linalg::partial_trace_raw(&rho.matrix, &rho.space.dims(), &keep_pos);
    DensityMatrix::from_computed(rho.space.select(keep)?, m)
}

fn trace_positions(space: &HilbertSpace, keep: &[&str]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let pos = space.positions_of(keep)?;
    if pos.len() == space.factors().len() {
        return Err(Error::NothingToTrace);
    }
    Ok(pos)
}

/// σ_SE = ρ_W − Tr_E[ρ_W] ⊗ Tr_S[ρ_W], expressed in ρ_W's factor order.
pub fn correlation_operator(
    rho_w: &DensityMatrix,
    s_labels: &[&str],
    e_labels: &[&str],
) -> Result<CorrelationOperator> {
    rho_w.space.check_partition(&[s_labels.to_vec(), e_labels.to_vec()])?;
    let rho_s = partial_trace(rho_w, s_labels)?;
    let rho_e = partial_trace(rho_w, e_labels)?;
    let product = tensor(&rho_s, &rho_e)?.reordered(&rho_w.space)?;
    let matrix = &rho_w.matrix - product.matrix;
    let op = CorrelationOperator {
        space: rho_w.space.clone(),
        s_labels: rho_w
            .space
            .select(s_labels)?
            .labels()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        e_labels: rho_w
            .space
            .select(e_labels)?
            .labels()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        matrix,
    };
    let (ds, de) = op.partial_trace_defects();
    if ds.max(de) > tolerance::derived() {
        return Err(Error::ToleranceBreach(format!(
            "correlation operator partial traces {ds:.3e}, {de:.3e}"
        )));
    }
    Ok(op)
}

/// ½ Σ |eigenvalues of (a − b)|.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    b.require_space(&a.space)?;
    Ok(0.5 * linalg::hermitian_trace_norm(&(&a.matrix - &b.matrix)))
}

fn check_len(space: &HilbertSpace, len: usize) -> Result<()> {
    if space.total_dim() != len {
        return Err(Error::SpaceMismatch(format!(
            "space {} has dimension {}, data has length {}",
            space,
            space.total_dim(),
            len
        )));
    }
    Ok(())
}

fn check_square(space: &HilbertSpace, m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidState("matrix is not square".into()));
    }
    check_len(space, m.nrows())
}

fn check_trace_and_psd(m: &CMatrix, tol: f64) -> Result<()> {
    let tr = linalg::trace(m);
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }
    let min = linalg::min_eigenvalue(m);
    if min < -tolerance::psd_floor() {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}
