use thiserror::Error;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subsystem `{0}` has dimension 0")]
    ZeroDimension(String),
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("partial trace needs at least one kept subsystem")]
    EmptyKeepSet,
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("not normalized (total {0})")]
    NotNormalized(f64),
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("map is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("map is not completely positive (min Choi eigenvalue {0:e})")]
    NotCP(f64),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("layout has no subsystem flagged classical")]
    NoClassicalLeg,
    #[error("bad cut: {0}")]
    BadCut(String),
    #[error("ensemble has no terms")]
    EmptyEnsemble,
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("interaction of step {step} is not invariant under pinching of the classical mediator")]
    NotGClassical { step: usize },
    #[error("configuration out of range: {0}")]
    ConfigOutOfRange(String),
    #[error("no instrument assigned to reachable transcript {0:?}")]
    MissingTranscriptInstrument(Vec<usize>),
    #[error("transcript register needs dimension {required}, cap is {cap}")]
    MediatorOverflow { required: usize, cap: usize },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
}

pub type Result<T> = std::result::Result<T, Error>;
