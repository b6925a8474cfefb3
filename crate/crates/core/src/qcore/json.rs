//! JSON encodings: `{ "space": [{"label","dim"}…], "re": [[…]], "im": [[…]] }`,
//! row-major.

use serde::{Deserialize, Serialize};

use super::linalg::{CMatrix, CVector};
use super::space::{Factor, HilbertSpace};
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Real and imaginary parts of a dense matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexMatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let shape_ok = self.im.len() == rows && self.re.iter().chain(&self.im).all(|r| r.len() == cols);
        if !shape_ok || rows == 0 || cols == 0 {
            return Err(Error::Json("re/im arrays must be nonempty and share one shape".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacedMatrixJson {
    pub space: Vec<Factor>,
    #[serde(flatten)]
    pub data: ComplexMatrixJson,
}

impl SpacedMatrixJson {
    pub fn new(space: &HilbertSpace, m: &CMatrix) -> Self {
        Self {
            space: space.factors().to_vec(),
            data: ComplexMatrixJson::from_matrix(m),
        }
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        HilbertSpace::from_factors(self.space.clone())
    }
}

impl DensityMatrix {
    pub fn to_json(&self) -> SpacedMatrixJson {
        SpacedMatrixJson::new(self.space(), self.matrix())
    }

    pub fn from_json(json: &SpacedMatrixJson) -> Result<Self> {
        DensityMatrix::new(json.space()?, json.data.to_matrix()?)
    }
}

/// Shortest round-trip text for a float, switching to exponent notation
/// outside [1e-4, 1e15) so tiny values stay readable in CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

pub fn vector_to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random;
    use rand::SeedableRng;

    #[test]
    fn numbers_round_trip_in_both_notations() {
        for x in [
            0.0,
            0.5,
            -3.25,
            1.8947e-15,
            4.539992976248485e-5,
            2.0f64.powi(60),
            1e-4,
            f64::MIN_POSITIVE,
        ] {
            let text = Num(x).to_string();
            assert_eq!(text.parse::<f64>().unwrap(), x, "{text}");
        }
        assert_eq!(Num(1.5e-15).to_string(), "1.5e-15");
        assert_eq!(Num(0.25).to_string(), "0.25");
    }

    #[test]
    fn density_matrix_json_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let space = HilbertSpace::new([("s", 2), ("e", 3)]).unwrap();
        let rho = random::density_matrix(&mut rng, &space);
        let text = serde_json::to_string(&rho.to_json()).unwrap();
        assert!(text.starts_with("{\"space\":[{\"label\":\"s\",\"dim\":2}"));
        let back: SpacedMatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(DensityMatrix::from_json(&back).unwrap(), rho);
    }

    #[test]
    fn ragged_arrays_are_rejected() {
        let bad = ComplexMatrixJson {
            re: vec![vec![1.0, 0.0], vec![0.0]],
            im: vec![vec![0.0; 2]; 2],
        };
        assert!(bad.to_matrix().is_err());
    }
}
