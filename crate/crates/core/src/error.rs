use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("space mismatch: `{left}` vs `{right}`")]
    SpaceMismatch { left: String, right: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frame is not orthonormal (max |F^H F - I| = {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("subspaces `{first}` and `{second}` overlap (max |cross inner product| = {overlap:e})")]
    OverlappingSubspaces {
        first: String,
        second: String,
        overlap: f64,
    },

    #[error("operator is not unitary (max |M^H M - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("projector family does not resolve the identity (max |sum P - I| = {defect:e})")]
    IncompleteFamily { defect: f64 },

    #[error("outcome labels do not match: microsystem {micro:?}, apparatus {apparatus:?}")]
    LabelMismatch {
        micro: Vec<String>,
        apparatus: Vec<String>,
    },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem id `{0}`")]
    DuplicateId(String),

    #[error("readout rule undefined on outcome tuple {0:?}")]
    UndefinedReadout(Vec<String>),

    #[error("state has weight {weight:e} outside every outcome subspace")]
    UnmeasurableState { weight: f64 },

    #[error("conditional state undefined: first-outcome weight {weight:e} is vanishing")]
    VanishingWeight { weight: f64 },

    #[error("dense dimension {dim} exceeds budget {budget}")]
    BudgetExceeded { dim: usize, budget: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
