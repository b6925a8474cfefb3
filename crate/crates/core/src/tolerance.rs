//! Numerical tolerances shared by every module.
//!
//! The defaults can be scaled once per process (the CLI reads
//! `ONTIC_SIM_TOLERANCE_SCALE`); everything else reads them through the
//! accessor functions so the scale applies uniformly.

use std::sync::OnceLock;

/// Construction checks: Hermiticity, trace, normalization, unitarity.
pub const CONSTRUCTION: f64 = 1e-12;
/// Checks on derived quantities: completeness, partial traces, reconstructions.
pub const DERIVED: f64 = 1e-10;
/// Eigenvalue floor for positive semidefiniteness.
pub const PSD_FLOOR: f64 = 1e-10;
/// Row sums of conditional-probability tables.
pub const ROW_SUM: f64 = 1e-9;
/// Kraus operators below this Frobenius norm are dropped.
pub const KRAUS_PRUNE: f64 = 1e-12;
/// Magnitude below which an amplitude counts as zero for phase fixing.
pub const PHASE: f64 = 1e-10;
/// Default gap under which two ontic probabilities are flagged degenerate.
pub const DEFAULT_DEGENERACY_GAP: f64 = 1e-8;
/// Eigenvalues below this are flagged as null ontic states.
pub const NULL_PROBABILITY: f64 = 1e-12;

static SCALE: OnceLock<f64> = OnceLock::new();

/// Sets the global tolerance multiplier. Only the first call has an effect;
/// returns `false` if a scale was already fixed.
pub fn set_scale(scale: f64) -> bool {
    scale.is_finite() && scale > 0.0 && SCALE.set(scale).is_ok()
}

pub fn scale() -> f64 {
    *SCALE.get().unwrap_or(&1.0)
}

pub fn construction() -> f64 {
    CONSTRUCTION * scale()
}

pub fn derived() -> f64 {
    DERIVED * scale()
}

pub fn psd_floor() -> f64 {
    PSD_FLOOR * scale()
}

pub fn row_sum() -> f64 {
    ROW_SUM * scale()
}
