use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected H^{expected}, got H^{found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinates must be finite")]
    NonFinite,

    #[error("the Heisenberg group H^n needs n >= 1")]
    ZeroDimension,

    #[error("dilation factor must be positive, got {0}")]
    InvalidDilation(f64),

    #[error("grade {grade} is out of range 1..={max}")]
    GradeOutOfRange { grade: usize, max: usize },

    #[error("grade mismatch: {left} vs {right}")]
    GradeMismatch { left: usize, right: usize },

    #[error("invalid index set {0:?}")]
    InvalidIndexSet(Vec<usize>),

    #[error("horizontal scalar product needs vanishing T components")]
    NotHorizontal,

    #[error("operation only defined in H^1, got H^{0}")]
    RequiresH1(usize),

    #[error("expected a unit horizontal vector, got norm {0}")]
    NotUnit(f64),

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("vanishing horizontal gradient (norm {norm:e}): characteristic point")]
    VanishingHorizontalGradient { norm: f64 },

    #[error("point is not on the surface: |f(p)| = {0:e}")]
    OffSurface(f64),

    #[error("derivative unavailable: {0}")]
    DerivativeUnavailable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
