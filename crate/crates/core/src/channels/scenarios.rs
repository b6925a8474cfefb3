//! The shipped unitary families used to exhibit (and bound) failures of the
//! semigroup property for reduced dynamics.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{semigroup_defect, GeneratedFamily, PiecewiseFamily, UnitaryFamily};
use crate::error::Result;
use crate::qcore::gates;
use crate::qcore::linalg::{self, CMatrix};
use crate::qcore::{DensityMatrix, HilbertSpace, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemigroupKind {
    /// Partial CNOT flow exp(−iθ H_CNOT), S controls a single qubit E.
    Entangling,
    /// Independent local generators on S and E.
    Factorized,
    /// SWAP of S with ancilla e1 by t₁, then entangling with fresh ancilla e2.
    Refactorizing,
}

impl SemigroupKind {
    pub const ALL: [SemigroupKind; 3] = [
        SemigroupKind::Entangling,
        SemigroupKind::Factorized,
        SemigroupKind::Refactorizing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemigroupKind::Entangling => "entangling",
            SemigroupKind::Factorized => "factorized",
            SemigroupKind::Refactorizing => "refactorizing",
        }
    }
}

pub struct SemigroupScenario {
    pub kind: SemigroupKind,
    pub family: Box<dyn UnitaryFamily>,
    pub rho_e0: DensityMatrix,
    pub s_labels: Vec<String>,
    pub e_labels: Vec<String>,
    /// Documented default times.
    pub t1: f64,
    pub t2: f64,
}

impl SemigroupScenario {
    pub fn new(kind: SemigroupKind) -> Result<Self> {
        let s = HilbertSpace::qubit("s");
        let ground = |label: &str| PureState::new(HilbertSpace::qubit(label), gates::ket_up()).map(|p| p.density());
        let (family, rho_e0, e_labels): (Box<dyn UnitaryFamily>, _, Vec<String>) = match kind {
            SemigroupKind::Entangling => {
                let space = s.tensor(&HilbertSpace::qubit("e"))?;
                let fam = GeneratedFamily::new(space, gates::cnot_generator())?;
                (Box::new(fam), ground("e")?, vec!["e".into()])
            }
            SemigroupKind::Factorized => {
                let h_s = gates::pauli_x().scale(0.7) + gates::pauli_z().scale(0.2);
                let h_e = gates::pauli_y().scale(1.3);
                let fam = GeneratedFamily::factorized(&s, &h_s, &HilbertSpace::qubit("e"), &h_e)?;
                let rho_e = DensityMatrix::diagonal(HilbertSpace::qubit("e"), &[0.75, 0.25])?;
                (Box::new(fam), rho_e, vec!["e".into()])
            }
            SemigroupKind::Refactorizing => {
                let space = HilbertSpace::new([("s", 2), ("e1", 2), ("e2", 2)])?;
                let id2 = linalg::identity(2);
                // exp(−i(π/2)(1 − SWAP)) = SWAP, reached at t = 1
                let swap_s_e1 = linalg::kron(&gates::swap_generator(2).scale(FRAC_PI_2), &id2);
                let entangle_s_e2 = cnot_on_outer_pair();
                let fam = PiecewiseFamily::new(vec![
                    (1.0, GeneratedFamily::new(space.clone(), swap_s_e1)?),
                    (1.0, GeneratedFamily::new(space, entangle_s_e2)?),
                ])?;
                let rho_e = crate::qcore::tensor(&ground("e1")?, &ground("e2")?)?;
                (Box::new(fam), rho_e, vec!["e1".into(), "e2".into()])
            }
        };
        Ok(Self {
            kind,
            family,
            rho_e0,
            s_labels: vec!["s".into()],
            e_labels,
            t1: 1.0,
            t2: 2.0,
        })
    }

    pub fn defect(&self, t1: f64, t2: f64, probe: &DensityMatrix) -> Result<f64> {
        let s: Vec<&str> = self.s_labels.iter().map(String::as_str).collect();
        let e: Vec<&str> = self.e_labels.iter().map(String::as_str).collect();
        semigroup_defect(self.family.as_ref(), &self.rho_e0, &s, &e, t1, t2, probe)
    }
}

/// H_CNOT between factors 0 and 2 of a three-qubit register.
fn cnot_on_outer_pair() -> CMatrix {
    let h = gates::cnot_generator();
    // h acts on (s, e2); embed with e1 in the middle
    CMatrix::from_fn(8, 8, |row, col| {
        let (s_r, e1_r, e2_r) = (row >> 2, (row >> 1) & 1, row & 1);
        let (s_c, e1_c, e2_c) = (col >> 2, (col >> 1) & 1, col & 1);
        if e1_r != e1_c {
            return linalg::ZERO;
        }
        h[(s_r * 2 + e2_r, s_c * 2 + e2_c)]
    })
}

/// |+⟩⟨+| on the system qubit, the default probe.
pub fn plus_probe() -> DensityMatrix {
    PureState::new(HilbertSpace::qubit("s"), gates::ket_plus())
        .expect("normalized")
        .density()
}
