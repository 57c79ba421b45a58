use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("span mismatch: {0}")]
    SpanMismatch(String),
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("form is not symmetric")]
    NotSymmetric,
    #[error("zero vector has no rank-one matrix")]
    ZeroVector,
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(String),
    #[error("rays span dimension {rank} < {ambient}; the cone is not full-dimensional")]
    NotFullDim { rank: usize, ambient: usize },
    #[error("ray {0} is not an extreme ray of the cone")]
    NotExtreme(usize),
    #[error("cone has {0} rays; at most 128 are supported")]
    TooManyRays(usize),
    #[error("facet meets the boundary of the cone of positive forms; it has no neighbour")]
    BoundaryFacet,
    #[error("witness does not map the face onto its claimed translate")]
    WitnessMismatch,
    #[error("coordinate {0} does not fit in a machine integer")]
    Overflow(String),
    #[error("rank {0} is outside the supported range {1}")]
    UnsupportedRank(usize, &'static str),
    #[error("top-cycle theorem needs an orientation-preserving group; GL_{0}(Z) with {0} even is not")]
    WrongGroupParity(usize),
    #[error("the vanishing statement concerns GL_n(Z) with n even, not {0}")]
    NotVanishingCase(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("tessellation invariant violated: {0}")]
    InvariantViolation(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("cache corruption in {path}: {reason}")]
    CacheCorrupt { path: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
