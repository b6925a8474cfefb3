//! A small curated set of witness pairs and parent channels on two qubits
//! labelled `s` and `e`.

use crate::channels::{unitary_channel, QuantumChannel, UnitaryOperator};
use crate::error::{Error, Result};
use crate::qcore::gates;
use crate::qcore::linalg::{c, CMatrix, ZERO};
use crate::qcore::{DensityMatrix, HilbertSpace, PureState};

/// Two parent states with identical `s` marginals.
#[derive(Debug, Clone)]
pub struct WitnessPair {
    pub id: String,
    pub rho_1: DensityMatrix,
    pub rho_2: DensityMatrix,
}

fn se() -> HilbertSpace {
    HilbertSpace::new([("s", 2), ("e", 2)]).expect("distinct labels")
}

fn bell() -> DensityMatrix {
    PureState::new(se(), gates::ket_bell()).expect("normalized").density()
}

/// |Φ⁺⟩⟨Φ⁺| against I/2 ⊗ I/2; both have marginal I/2.
pub fn bell_vs_mixed() -> WitnessPair {
    WitnessPair {
        id: "bell-vs-product".into(),
        rho_1: bell(),
        rho_2: DensityMatrix::maximally_mixed(se()),
    }
}

/// Werner state p|Φ⁺⟩⟨Φ⁺| + (1 − p)·1/4 against 1/4.
pub fn werner_pair(p: f64) -> Result<WitnessPair> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("Werner weight {p} outside [0,1]")));
    }
    let mixed = DensityMatrix::maximally_mixed(se());
    Ok(WitnessPair {
        id: format!("werner-{p}"),
        rho_1: DensityMatrix::mixture(&[(p, &bell()), (1.0 - p, &mixed)])?,
        rho_2: mixed,
    })
}

pub fn witness_library() -> Vec<WitnessPair> {
    let mut out = vec![bell_vs_mixed()];
    out.extend(
        [0.25, 0.5, 0.75]
            .into_iter()
            .map(|p| werner_pair(p).expect("valid weight")),
    );
    out
}

/// Amplitude damping (γ = 0.3) on `s` tensored with dephasing (p = 0.4) on
/// `e`; both factors are trace-preserving.
pub fn factorized_witness_channel() -> QuantumChannel {
    let g: f64 = 0.3;
    let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c((1.0 - g).sqrt(), 0.0)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[ZERO, c(g.sqrt(), 0.0), ZERO, ZERO]);
    let damping = QuantumChannel::new(HilbertSpace::qubit("s"), HilbertSpace::qubit("s"), vec![k0, k1])
        .expect("complete Kraus set");
    let p: f64 = 0.4;
    let d0 = CMatrix::identity(2, 2) * c((1.0 - p).sqrt(), 0.0);
    let d1 = gates::pauli_z() * c(p.sqrt(), 0.0);
    let dephasing = QuantumChannel::new(HilbertSpace::qubit("e"), HilbertSpace::qubit("e"), vec![d0, d1])
        .expect("complete Kraus set");
    damping.tensor(&dephasing).expect("distinct labels")
}

pub const WITNESS_CHANNELS: [&str; 3] = ["cnot", "factorized", "identity"];

/// Parent channel by name: `cnot` (s controls e), `factorized`, `identity`.
pub fn witness_channel(name: &str) -> Result<QuantumChannel> {
    match name {
        "cnot" => Ok(unitary_channel(&UnitaryOperator::new(se(), gates::cnot())?)),
        "factorized" => Ok(factorized_witness_channel()),
        "identity" => Ok(QuantumChannel::identity(se())),
        other => Err(Error::InvalidParameter(format!(
            "unknown witness channel `{other}` (expected one of {})",
            WITNESS_CHANNELS.join(", ")
        ))),
    }
}
