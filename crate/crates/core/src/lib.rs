//! Finite-dimensional open-system quantum dynamics built around ontic
//! decompositions of density matrices.
//!
//! * [`qcore`]: labeled composite spaces, states, partial traces.
//! * [`channels`]: Kraus-form CPTP maps, environment dilations, composition.
//! * [`ontic`]: spectral (ontic) decompositions and conditional probabilities.
//! * [`measurement`]: the pointer-overlap measurement model and Born corrections.
//! * [`trajectories`]: coarse-grained trajectory measures and samplers.
//! * [`opendyn`]: environment-conditioned channels and nonlinearity witnesses.

pub mod channels;
pub mod error;
pub mod measurement;
pub mod ontic;
pub mod opendyn;
pub mod qcore;
pub mod tolerance;
pub mod trajectories;

pub use channels::{QuantumChannel, UnitaryOperator};
pub use error::{Error, Result};
pub use measurement::{MeasurementModel, MeasurementOutcomeReport};
pub use ontic::{ConditionalProbabilityTable, OnticDecomposition};
pub use opendyn::NonlinearityWitnessReport;
pub use qcore::{CMatrix, CVector, DensityMatrix, HilbertSpace, PureState};
pub use trajectories::{MarkovKernelChain, OnticTrajectory};
