//! Random states, unitaries and Hermitian generators for fuzzing and
//! scenario construction.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{self, CMatrix, CVector};
use super::space::HilbertSpace;
use super::state::{DensityMatrix, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state.
pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, space: &HilbertSpace) -> PureState {
    let v = CVector::from_fn(space.total_dim(), |_, _| gaussian(rng));
    PureState::normalized(space.clone(), v).expect("Gaussian vector is nonzero")
}

/// Full-rank density matrix from the Hilbert–Schmidt ensemble.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, space: &HilbertSpace) -> DensityMatrix {
    let d = space.total_dim();
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::from_computed(space.clone(), m.unscale(tr)).expect("Wishart matrix is PSD")
}

/// Hermitian matrix from the Gaussian unitary ensemble.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    linalg::hermitize(&ginibre(rng, dim, dim))
}

/// Hermitian matrix rescaled to unit operator norm.
pub fn unit_norm_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let h = hermitian(rng, dim);
    let norm = linalg::operator_norm(&h);
    h.unscale(norm)
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                linalg::ONE
            }
        } else {
            linalg::ZERO
        }
    });
    q * phases
}
