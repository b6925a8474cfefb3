//! Standard single- and two-qubit operators and states.

use super::linalg::{c, CMatrix, CVector, ONE, ZERO};

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// CNOT with the first factor as control.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// CNOT with the second factor as control.
pub fn cnot_reversed() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(3, 1)] = ONE;
    m[(2, 2)] = ONE;
    m[(1, 3)] = ONE;
    m
}

/// Exchange of two factors of equal dimension `d`.
pub fn swap(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = ONE;
        }
    }
    m
}

/// Generator whose flow reaches CNOT at θ = π: H = |1⟩⟨1| ⊗ (1 − X)/2.
pub fn cnot_generator() -> CMatrix {
    let p1 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    let half = (CMatrix::identity(2, 2) - pauli_x()).scale(0.5);
    p1.kronecker(&half)
}

/// Generator whose flow reaches SWAP at θ = π/2: H = 1 − SWAP.
pub fn swap_generator(d: usize) -> CMatrix {
    CMatrix::identity(d * d, d * d) - swap(d)
}

pub fn ket_up() -> CVector {
    CVector::from_vec(vec![ONE, ZERO])
}

pub fn ket_down() -> CVector {
    CVector::from_vec(vec![ZERO, ONE])
}

pub fn ket_plus() -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)])
}

pub fn ket_minus() -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![c(h, 0.0), c(-h, 0.0)])
}

/// |Φ⁺⟩ = (|00⟩ + |11⟩)/√2.
pub fn ket_bell() -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)])
}
