use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum CarnotError {
    /// A group configuration violated its invariants (n < 1, some L_j = 0, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Vector or point dimensions do not match the owning configuration.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A horizontal index was outside 0..2n.
    #[error("index {index} out of range for horizontal dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// Jet evaluation was requested inside a field's declared singular set.
    #[error("jet evaluation at a singular point of the field")]
    SingularPoint,

    /// A formula required a negative power of a vanishing gradient norm.
    #[error("degenerate point: gradient norm vanishes but exponent {exponent} < 0")]
    DegeneratePoint { exponent: f64 },

    /// Domain error in a jet primitive (log of non-positive value, etc.).
    #[error("domain error in jet primitive: {0}")]
    Domain(String),

    /// A dilation factor or operator exponent was outside its legal range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, CarnotError>;
