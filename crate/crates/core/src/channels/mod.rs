//! Linear CPTP maps in Kraus form.
//!
//! Channels built from a parent unitary and an initial environment state use
//! the Kraus operators `√p_e ⟨e'|U_W|e⟩`, with `{|e⟩}` the eigenbasis of the
//! environment state. Two channels are equal when their Choi matrices agree;
//! Kraus lists are never compared directly.

mod family;
pub mod scenarios;

use serde::{Deserialize, Serialize};

pub use family::{GeneratedFamily, PiecewiseFamily, UnitaryFamily};

use crate::error::{Error, Result};
use crate::qcore::json::ComplexMatrixJson;
use crate::qcore::linalg::{self, CMatrix, CVector};
use crate::qcore::{partial_trace, trace_distance, DensityMatrix, Factor, HilbertSpace};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl UnitaryOperator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != space.total_dim() {
            return Err(Error::SpaceMismatch(format!(
                "{}x{} matrix on {}",
                matrix.nrows(),
                matrix.ncols(),
                space
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > tolerance::construction() {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            matrix: linalg::identity(d),
        }
    }

    /// exp(−iHt) for a Hermitian generator H.
    pub fn evolution(space: HilbertSpace, generator: &CMatrix, t: f64) -> Result<Self> {
        Self::new(space, linalg::expm_hermitian(generator, t))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self · other`.
    pub fn then_after(&self, other: &UnitaryOperator) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, other.space)));
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn tensor(&self, other: &UnitaryOperator) -> Result<Self> {
        Ok(Self {
            space: self.space.tensor(&other.space)?,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }

    /// U ρ U†.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.require_space(&self.space)?;
        DensityMatrix::from_computed(self.space.clone(), &self.matrix * rho.matrix() * self.matrix.adjoint())
    }

    /// The same operator with factors permuted into `target`'s order.
    pub fn reordered(&self, target: &HilbertSpace) -> Result<Self> {
        let order = self.space.order_for(target)?;
        Ok(Self {
            space: target.clone(),
            matrix: linalg::permute_factors(&self.matrix, &self.space.dims(), &order),
        })
    }
}

fn unitarity_defect(m: &CMatrix) -> f64 {
    linalg::max_abs(&(m.adjoint() * m - linalg::identity(m.ncols())))
}

/// A CPTP map stored as Kraus operators of shape `out_dim × in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    in_space: HilbertSpace,
    out_space: HilbertSpace,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    /// Checks shapes and the completeness relation Σ K†K = 1.
    pub fn new(in_space: HilbertSpace, out_space: HilbertSpace, kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::new_unchecked(in_space, out_space, kraus)?;
        let defect = ch.completeness_defect();
        if defect > tolerance::derived() {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(ch)
    }

    /// Checks shapes only. Used to load Kraus sets that are to be diagnosed
    /// with [`verify_cptp`].
    pub fn new_unchecked(in_space: HilbertSpace, out_space: HilbertSpace, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let (din, dout) = (in_space.total_dim(), out_space.total_dim());
        if let Some(k) = kraus.iter().find(|k| k.nrows() != dout || k.ncols() != din) {
            return Err(Error::SpaceMismatch(format!(
                "Kraus operator is {}x{}, expected {dout}x{din}",
                k.nrows(),
                k.ncols()
            )));
        }
        Ok(Self {
            in_space,
            out_space,
            kraus,
        })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        unitary_channel(&UnitaryOperator::identity(space))
    }

    pub fn in_space(&self) -> &HilbertSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &HilbertSpace {
        &self.out_space
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// max |Σ K†K − 1|.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.in_space.total_dim();
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        linalg::max_abs(&(sum - linalg::identity(d)))
    }

    /// Σ K X K† for an arbitrary operator X on the input space.
    pub fn apply_operator(&self, x: &CMatrix) -> CMatrix {
        let d = self.out_space.total_dim();
        self.kraus
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * x * k.adjoint())
    }

    /// Choi matrix Σ_ij |i⟩⟨j| ⊗ 𝓔(|i⟩⟨j|), input index most significant.
    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.in_space.total_dim(), self.out_space.total_dim());
        let mut choi = CMatrix::zeros(din * dout, din * dout);
        for i in 0..din {
            for j in 0..din {
                // 𝓔(|i⟩⟨j|) = Σ_α K_α[:, i] K_α[:, j]†
                for k in &self.kraus {
                    let block = linalg::outer2(&k.column(i).into_owned(), &k.column(j).into_owned());
                    let mut view = choi.view_mut((i * dout, j * dout), (dout, dout));
                    view += block;
                }
            }
        }
        choi
    }

    /// 𝓔 ⊗ 𝓕 on the tensor of the input (and output) spaces.
    pub fn tensor(&self, other: &QuantumChannel) -> Result<Self> {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        Ok(Self {
            in_space: self.in_space.tensor(&other.in_space)?,
            out_space: self.out_space.tensor(&other.out_space)?,
            kraus,
        })
    }

    /// The same map with input and output factors listed in `target` order.
    pub fn reordered(&self, target: &HilbertSpace) -> Result<Self> {
        let in_order = self.in_space.order_for(target)?;
        let out_order = self.out_space.order_for(target)?;
        let (din, dout) = (self.in_space.dims(), self.out_space.dims());
        let in_map = linalg::permutation_map(&din, &in_order);
        let out_map = linalg::permutation_map(&dout, &out_order);
        let kraus = self
            .kraus
            .iter()
            .map(|k| CMatrix::from_fn(k.nrows(), k.ncols(), |i, j| k[(out_map[i], in_map[j])]))
            .collect();
        Ok(Self {
            in_space: target.clone(),
            out_space: target.clone(),
            kraus,
        })
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            in_space: self.in_space.factors().to_vec(),
            out_space: self.out_space.factors().to_vec(),
            kraus: self.kraus.iter().map(ComplexMatrixJson::from_matrix).collect(),
        }
    }

    /// Loads a channel without the completeness check; see [`verify_cptp`].
    pub fn from_json_unchecked(json: &ChannelJson) -> Result<Self> {
        let kraus = json
            .kraus
            .iter()
            .map(ComplexMatrixJson::to_matrix)
            .collect::<Result<_>>()?;
        Self::new_unchecked(
            HilbertSpace::from_factors(json.in_space.clone())?,
            HilbertSpace::from_factors(json.out_space.clone())?,
            kraus,
        )
    }

    pub fn from_json(json: &ChannelJson) -> Result<Self> {
        let ch = Self::from_json_unchecked(json)?;
        Self::new(ch.in_space, ch.out_space, ch.kraus)
    }
}

/// `{ "in_space": …, "out_space": …, "kraus": [ {re, im} … ] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub in_space: Vec<Factor>,
    pub out_space: Vec<Factor>,
    pub kraus: Vec<ComplexMatrixJson>,
}

fn prune(kraus: Vec<CMatrix>) -> Vec<CMatrix> {
    kraus
        .into_iter()
        .filter(|k| linalg::frobenius(k) >= tolerance::KRAUS_PRUNE)
        .collect()
}

pub fn unitary_channel(u: &UnitaryOperator) -> QuantumChannel {
    QuantumChannel {
        in_space: u.space.clone(),
        out_space: u.space.clone(),
        kraus: vec![u.matrix.clone()],
    }
}

/// The reduced channel ρ_S ↦ Tr_E[U_W (ρ_S ⊗ ρ_E) U_W†] in Kraus form.
///
/// `s_labels` and `e_labels` must partition the unitary's space; `rho_e0`
/// must live on exactly the environment factors (any order).
pub fn dilation_channel(
    u_w: &UnitaryOperator,
    rho_e0: &DensityMatrix,
    s_labels: &[&str],
    e_labels: &[&str],
) -> Result<QuantumChannel> {
    let space = u_w.space();
    space
        .check_partition(&[s_labels.to_vec(), e_labels.to_vec()])
        .map_err(|e| Error::SpaceMismatch(e.to_string()))?;
    let s_space = space.select(s_labels)?;
    let e_space = space.select(e_labels)?;
    let rho_e = rho_e0.reordered(&e_space)?;
    let u = u_w.reordered(&s_space.tensor(&e_space)?)?;
    let (ds, de) = (s_space.total_dim(), e_space.total_dim());

    let (probs, basis) = linalg::hermitian_eigen(rho_e.matrix());
    let mut kraus = Vec::with_capacity(de * de);
    for (e, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let ket_e: CVector = basis.column(e).into_owned();
        // U (1_S ⊗ |e⟩): (ds·de) × ds
        let lifted = CMatrix::from_fn(ds * de, ds, |row, s| {
            (0..de).map(|f| u.matrix[(row, s * de + f)] * ket_e[f]).sum()
        });
        for e_out in 0..de {
            let bra: CVector = basis.column(e_out).into_owned();
            let k = CMatrix::from_fn(ds, ds, |s_out, s| {
                (0..de)
                    .map(|f| bra[f].conj() * lifted[(s_out * de + f, s)])
                    .sum::<num_complex::Complex64>()
                    * p.sqrt()
            });
            kraus.push(k);
        }
    }
    let kraus = prune(kraus);
    QuantumChannel::new(s_space.clone(), s_space, kraus)
}

/// Σ_α K_α ρ K_α†.
pub fn apply(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.require_space(&ch.in_space)?;
    DensityMatrix::from_computed(ch.out_space.clone(), ch.apply_operator(rho.matrix()))
}

/// `later ∘ earlier`, with Kraus set {K_β K_α}.
pub fn compose(later: &QuantumChannel, earlier: &QuantumChannel) -> Result<QuantumChannel> {
    if earlier.out_space != later.in_space {
        return Err(Error::SpaceMismatch(format!(
            "cannot feed {} into {}",
            earlier.out_space, later.in_space
        )));
    }
    let kraus = later
        .kraus
        .iter()
        .flat_map(|b| earlier.kraus.iter().map(move |a| b * a))
        .collect();
    Ok(QuantumChannel {
        in_space: earlier.in_space.clone(),
        out_space: later.out_space.clone(),
        kraus: prune(kraus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub trace_preserving: bool,
    pub completely_positive: bool,
    pub min_choi_eigenvalue: f64,
    pub completeness_defect: f64,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.trace_preserving && self.completely_positive
    }
}

pub fn verify_cptp(ch: &QuantumChannel) -> CptpReport {
    let completeness_defect = ch.completeness_defect();
    let min_choi_eigenvalue = linalg::min_eigenvalue(&ch.choi());
    CptpReport {
        trace_preserving: completeness_defect <= tolerance::derived(),
        completely_positive: min_choi_eigenvalue >= -tolerance::psd_floor(),
        min_choi_eigenvalue,
        completeness_defect,
    }
}

/// Max-entry distance between Choi matrices.
pub fn choi_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.in_space != b.in_space || a.out_space != b.out_space {
        return Err(Error::SpaceMismatch("channels act on different spaces".into()));
    }
    Ok(linalg::max_abs(&(a.choi() - b.choi())))
}

pub fn channels_equal(a: &QuantumChannel, b: &QuantumChannel) -> Result<bool> {
    Ok(choi_distance(a, b)? <= tolerance::derived())
}

/// Trace distance between the probe evolved by the two-segment composition
/// and by the single map from 0 to t₂.
///
/// The t₂←t₁ segment dilates `U(t₂)U(t₁)†` against the environment's reduced
/// state at t₁ (obtained by evolving `probe ⊗ ρ_E(0)`), discarding whatever
/// system–environment correlations exist at t₁.
pub fn semigroup_defect(
    family: &dyn UnitaryFamily,
    rho_e0: &DensityMatrix,
    s_labels: &[&str],
    e_labels: &[&str],
    t1: f64,
    t2: f64,
    probe: &DensityMatrix,
) -> Result<f64> {
    if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) {
        return Err(Error::BadInterval { t1, t2 });
    }
    let u1 = family.at(t1)?;
    let u2 = family.at(t2)?;
    let space = u1.space().clone();

    let seg1 = dilation_channel(&u1, rho_e0, s_labels, e_labels)?;
    let full = dilation_channel(&u2, rho_e0, s_labels, e_labels)?;

    let rho_w0 = crate::qcore::tensor(probe, rho_e0)?.reordered(&space)?;
    let rho_w1 = u1.conjugate(&rho_w0)?;
    let rho_e1 = partial_trace(&rho_w1, e_labels)?;
    let seg2 = dilation_channel(&u2.then_after(&u1.adjoint())?, &rho_e1, s_labels, e_labels)?;

    let composed = apply(&compose(&seg2, &seg1)?, probe)?;
    let direct = apply(&full, probe)?;
    trace_distance(&composed, &direct)
}
