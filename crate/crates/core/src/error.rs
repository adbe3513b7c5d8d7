use thiserror::Error;

/// Errors raised by the algebra kernels and the resolution pipelines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("operation requires field coefficients")]
    NotAField,
    #[error("unsupported ring for {0}: only prime-field coefficients are handled")]
    UnsupportedRing(&'static str),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("malformed permutation: {0}")]
    MalformedPermutation(String),
    #[error("group order {order} exceeds the cap {cap}")]
    CapExceeded { order: usize, cap: usize },
    #[error("dimension {rank} exceeds the per-term cap {cap}")]
    DimensionCap { rank: usize, cap: usize },
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("not a normal subgroup")]
    NotNormal,
    #[error("action does not respect the group relations: {0}")]
    RelationFailure(String),
    #[error("certificate rejected: {0}")]
    InvalidCertificate(String),
    #[error("map is not equivariant: {0}")]
    NotEquivariant(String),
    #[error("complex check failed in degree {degree}: {reason}")]
    Complex { degree: i64, reason: String },
    #[error("hypothesis violated in degree {degree}: {reason}")]
    Hypothesis { degree: i64, reason: String },
    #[error("no equivariant lift exists in degree {degree}")]
    LiftFailed { degree: i64 },
    #[error("sign data is inconsistent: {0}")]
    SignInconsistent(String),
    #[error("internal invariant failed at stage {stage}: {reason}")]
    Stage { stage: String, reason: String },
    #[error("search exhausted its caps ({0}); this is not a proof that no resolution exists")]
    Exhausted(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
