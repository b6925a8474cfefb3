use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::json::Num;
use crate::qcore::linalg::CVector;

/// Polar angle from +z and azimuth from +x toward +y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochPoint {
    pub theta: f64,
    pub phi: f64,
}

/// Two antipodal strands traced by the ontic basis of a qubit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Helix {
    pub times: Vec<f64>,
    pub strand1: Vec<BlochPoint>,
    pub strand2: Vec<BlochPoint>,
}

/// cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩.
pub fn bloch_state(p: BlochPoint) -> CVector {
    CVector::from_vec(vec![
        Complex64::new((p.theta / 2.0).cos(), 0.0),
        Complex64::from_polar((p.theta / 2.0).sin(), p.phi),
    ])
}

const POLE: f64 = 1e-12;

fn point_from_axis(x: f64, z: f64) -> BlochPoint {
    let theta = z.clamp(-1.0, 1.0).acos();
    // the azimuth is undefined at the poles; pin it to 0 there
    let phi = if theta.sin() < POLE || x >= 0.0 { 0.0 } else { PI };
    BlochPoint { theta, phi }
}

/// Strand 1 points along (cos ωt, 0, sin ωt), starting on +x and rotating in
/// the x–z plane; strand 2 is its antipode.
pub fn bloch_helix(omega: f64, times: &[f64]) -> Helix {
    let mut strand1 = Vec::with_capacity(times.len());
    let mut strand2 = Vec::with_capacity(times.len());
    for &t in times {
        let (z, x) = (omega * t).sin_cos();
        strand1.push(point_from_axis(x, z));
        strand2.push(point_from_axis(-x, -z));
    }
    Helix {
        times: times.to_vec(),
        strand1,
        strand2,
    }
}

/// `t,index,theta1,phi1,theta2,phi2` rows; `indices[k]` says which strand
/// (0 or 1) the ontic state occupies at time k.
pub fn helix_to_csv(helix: &Helix, indices: &[usize]) -> Result<String> {
    if indices.len() != helix.times.len() {
        return Err(Error::GridMismatch(format!(
            "{} indices for {} helix points",
            indices.len(),
            helix.times.len()
        )));
    }
    let mut out = String::from("t,index,theta1,phi1,theta2,phi2\n");
    for (k, index) in indices.iter().enumerate() {
        let (a, b) = (helix.strand1[k], helix.strand2[k]);
        let _ = writeln!(
            out,
            "{},{index},{},{},{},{}",
            Num(helix.times[k]),
            Num(a.theta),
            Num(a.phi),
            Num(b.theta),
            Num(b.phi)
        );
    }
    Ok(out)
}
