use super::UnitaryOperator;
use crate::error::{Error, Result};
use crate::qcore::linalg::{self, CMatrix};
use crate::qcore::HilbertSpace;

/// A time-parameterized unitary U(t) with U(0) = 1.
pub trait UnitaryFamily: Send + Sync {
    fn space(&self) -> &HilbertSpace;
    fn at(&self, t: f64) -> Result<UnitaryOperator>;
}

/// U(t) = exp(−iHt), evaluated exactly through the spectrum of H.
#[derive(Debug, Clone)]
pub struct GeneratedFamily {
    space: HilbertSpace,
    generator: CMatrix,
    values: Vec<f64>,
    vectors: CMatrix,
}

impl GeneratedFamily {
    pub fn new(space: HilbertSpace, generator: CMatrix) -> Result<Self> {
        if !generator.is_square() || generator.nrows() != space.total_dim() {
            return Err(Error::SpaceMismatch(format!("generator does not act on {space}")));
        }
        let defect = linalg::hermiticity_defect(&generator);
        if defect > crate::tolerance::construction() * generator.nrows().max(1) as f64 {
            return Err(Error::InvalidParameter(format!(
                "generator is not Hermitian (defect {defect:.3e})"
            )));
        }
        let (values, vectors) = linalg::hermitian_eigen(&generator);
        Ok(Self {
            space,
            generator,
            values,
            vectors,
        })
    }

    /// H = H_S ⊗ 1 + 1 ⊗ H_E on `s ⊗ e`.
    pub fn factorized(s: &HilbertSpace, h_s: &CMatrix, e: &HilbertSpace, h_e: &CMatrix) -> Result<Self> {
        let space = s.tensor(e)?;
        let (ds, de) = (s.total_dim(), e.total_dim());
        let h = linalg::kron(h_s, &linalg::identity(de)) + linalg::kron(&linalg::identity(ds), h_e);
        Self::new(space, h)
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn generator_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl UnitaryFamily for GeneratedFamily {
    fn space(&self) -> &HilbertSpace {
        &self.space
    }

    fn at(&self, t: f64) -> Result<UnitaryOperator> {
        UnitaryOperator::new(
            self.space.clone(),
            linalg::unitary_from_spectrum(&self.values, &self.vectors, t),
        )
    }
}

/// Piecewise-constant generators: segment k runs for `durations[k]`; the last
/// segment extends indefinitely.
#[derive(Debug, Clone)]
pub struct PiecewiseFamily {
    segments: Vec<(f64, GeneratedFamily)>,
}

impl PiecewiseFamily {
    pub fn new(segments: Vec<(f64, GeneratedFamily)>) -> Result<Self> {
        let first = segments.first().ok_or(Error::EmptySelection)?;
        let space = first.1.space.clone();
        for (d, f) in &segments {
            if !(d.is_finite() && *d > 0.0) {
                return Err(Error::InvalidParameter(format!("segment duration {d}")));
            }
            if f.space != space {
                return Err(Error::SpaceMismatch("segments act on different spaces".into()));
            }
        }
        Ok(Self { segments })
    }
}

impl UnitaryFamily for PiecewiseFamily {
    fn space(&self) -> &HilbertSpace {
        &self.segments[0].1.space
    }

    fn at(&self, t: f64) -> Result<UnitaryOperator> {
        let mut u = UnitaryOperator::identity(self.space().clone());
        let mut remaining = t;
        let last = self.segments.len() - 1;
        for (k, (duration, family)) in self.segments.iter().enumerate() {
            let step = if k == last { remaining } else { remaining.min(*duration) };
            if step <= 0.0 {
                break;
            }
            u = family.at(step)?.then_after(&u)?;
            remaining -= step;
        }
        Ok(u)
    }
}
