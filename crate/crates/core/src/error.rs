use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension {0} outside supported range 1..={max}", max = crate::qmcore::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {trace} differs from one")]
    NotUnitTrace { trace: f64 },

    #[error("effect is the zero operator")]
    ZeroEffect,

    #[error("matrix is not a projector (deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("POVM elements do not sum to the identity (deviation {deviation:.3e})")]
    IncompletePovm { deviation: f64 },

    #[error("effect has eigenvalues above one (max {max_eigenvalue})")]
    UnnormalizedEffect { max_eigenvalue: f64 },

    #[error("post-selection probability {probability:.3e} is at or below the cutoff")]
    DegeneratePostSelection { probability: f64 },

    #[error("Tr(rho E) has a non-negligible imaginary part {imag:.3e}")]
    ComplexTrace { imag: f64 },

    #[error("observable commutes with neither the state nor the effect")]
    CommutationRequired,

    #[error("connection state carries no (rho, E) factors to check the commutation gate")]
    MissingFactors,

    #[error("coupling blocks for eigenvalues {a} and {b} coincide")]
    AliasedCoupling { a: f64, b: f64 },

    #[error("time {t} outside schedule range [{start}, {end}]")]
    OutOfScheduleRange { t: f64, start: f64, end: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("design matrix is singular (smallest singular value {smallest:.3e})")]
    SingularDesign { smallest: f64 },

    #[error("reconstructed effect inconsistent with data (minimum eigenvalue {min_eigenvalue:.3e})")]
    InconsistentData { min_eigenvalue: f64 },

    #[error("outcome {outcome} has zero probability")]
    ZeroProbabilityOutcome { outcome: usize },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable identifier of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::NonFinite => "NonFinite",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPositive { .. } => "NotPositive",
            Error::NotUnitTrace { .. } => "NotUnitTrace",
            Error::ZeroEffect => "ZeroEffect",
            Error::NotProjector { .. } => "NotProjector",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::IncompletePovm { .. } => "IncompletePovm",
            Error::UnnormalizedEffect { .. } => "UnnormalizedEffect",
            Error::DegeneratePostSelection { .. } => "DegeneratePostSelection",
            Error::ComplexTrace { .. } => "ComplexTrace",
            Error::CommutationRequired => "CommutationRequired",
            Error::MissingFactors => "MissingFactors",
            Error::AliasedCoupling { .. } => "AliasedCoupling",
            Error::OutOfScheduleRange { .. } => "OutOfScheduleRange",
            Error::InvalidSchedule(_) => "InvalidSchedule",
            Error::SingularDesign { .. } => "SingularDesign",
            Error::InconsistentData { .. } => "InconsistentData",
            Error::ZeroProbabilityOutcome { .. } => "ZeroProbabilityOutcome",
            Error::InvalidEnsemble(_) => "InvalidEnsemble",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
