//! Dense linear algebra over labeled composite Hilbert spaces.

pub mod gates;
pub mod json;
pub mod linalg;
pub mod random;
mod space;
mod state;

pub use linalg::{CMatrix, CVector};
pub use space::{Factor, HilbertSpace};
pub use state::{
    correlation_operator, partial_trace, tensor, trace_distance, CorrelationOperator, DensityMatrix, PureState,
};
