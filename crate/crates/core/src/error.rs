use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subsystem label `{0}` appears in both operands")]
    LabelClash(String),
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("subsystem dimension must be positive (label `{0}`)")]
    ZeroDimension(String),
    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),
    #[error("partial trace would keep every subsystem")]
    NothingToTrace,
    #[error("subsystem selection must be nonempty")]
    EmptySelection,
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("operator is not unitary (max |U†U - 1| = {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("Kraus set is not trace preserving (max |ΣK†K - 1| = {defect:.3e})")]
    NotTracePreserving { defect: f64 },
    #[error("times must satisfy 0 < t1 < t2 (got t1 = {t1}, t2 = {t2})")]
    BadInterval { t1: f64, t2: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPSD { min_eigenvalue: f64 },
    #[error("operator is not a projector (defect {defect:.3e})")]
    NotAProjector { defect: f64 },
    #[error("witness pair marginals differ (trace distance {distance:.3e})")]
    NotAWitnessPair { distance: f64 },
    #[error("time grid mismatch: {0}")]
    GridMismatch(String),
    #[error("{count} trajectories exceed the enumeration limit of {limit}")]
    TooManyTrajectories { count: f64, limit: usize },
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("internal tolerance breach: {0}")]
    ToleranceBreach(String),
    #[error("malformed JSON: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}
