//! Dense complex matrix helpers over row-major tensor-product index layouts.
//!
//! Composite indices follow the usual Kronecker convention: the first factor
//! is the most significant digit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Projector |v⟩⟨v|.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn outer2(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Tr[AB] without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// ⟨v|M|v⟩ (real part; M is assumed Hermitian by the callers).
pub fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, with the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    hermitian_eigen(m).0[0]
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.iter().map(|x| x.abs()).sum()
}

/// exp(−iHt) for Hermitian H, via its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    unitary_from_spectrum(&values, &vectors, t)
}

pub(crate) fn unitary_from_spectrum(values: &[f64], vectors: &CMatrix, t: f64) -> CMatrix {
    let phases = CVector::from_iterator(values.len(), values.iter().map(|&l| Complex64::from_polar(1.0, -l * t)));
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * phases[j]);
    scaled * vectors.adjoint()
}

/// Largest singular value (spectral norm).
pub fn operator_norm(m: &CMatrix) -> f64 {
    hermitian_eigen(&(m.adjoint() * m))
        .0
        .last()
        .map(|x| x.max(0.0).sqrt())
        .unwrap_or(0.0)
}

/// Splits a composite index into per-factor digits.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn compose_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Partial trace keeping the factor positions in `keep` (ascending) and
/// tracing out the rest.
pub fn partial_trace_raw(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kept_total: usize = keep_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // groups[t] lists (full index, kept index) pairs sharing traced index t
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_total];
    let total: usize = dims.iter().product();
    for full in 0..total {
        let d = digits(full, dims);
        let k: Vec<usize> = keep.iter().map(|&i| d[i]).collect();
        let t: Vec<usize> = traced.iter().map(|&i| d[i]).collect();
        groups[compose_index(&t, &traced_dims)].push((full, compose_index(&k, &keep_dims)));
    }
    let mut out = CMatrix::zeros(kept_total, kept_total);
    for group in &groups {
        for &(i, ki) in group {
            for &(j, kj) in group {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    out
}

/// Index map for reordering tensor factors: `order[k]` is the old position of
/// the factor placed at new position `k`. Returns, for every new composite
/// index, the old composite index.
pub fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let total: usize = dims.iter().product();
    (0..total)
        .map(|n| {
            let nd = digits(n, &new_dims);
            let mut old = vec![0; dims.len()];
            for (k, &pos) in order.iter().enumerate() {
                old[pos] = nd[k];
            }
            compose_index(&old, dims)
        })
        .collect()
}

pub fn permute_factors(m: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    let map = permutation_map(dims, order);
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(map[i], map[j])])
}

pub fn permute_vector(v: &CVector, dims: &[usize], order: &[usize]) -> CVector {
    let map = permutation_map(dims, order);
    CVector::from_fn(v.len(), |i, _| v[map[i]])
}

/// Multiplies a vector by the phase that makes its first significant
/// amplitude real and positive.
pub fn canonical_phase(v: &CVector, threshold: f64) -> CVector {
    match v.iter().find(|z| z.norm() > threshold) {
        Some(z) => {
            let phase = z.conj() / z.norm();
            v.map(|x| x * phase)
        }
        None => v.clone(),
    }
}
