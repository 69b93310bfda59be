use std::fmt;

/// Errors raised while constructing or evaluating effectiveness measures.
#[derive(Debug, Clone, PartialEq)]
pub enum MoeError {
    /// A constructor or function argument failed validation.
    InvalidParameter { name: &'static str, reason: String },
    /// An operation that needs at least one element received none.
    EmptyInput { what: &'static str },
    /// Two discrete quantities do not share the same ordered label set.
    LabelMismatch { expected: String, got: String },
    /// A label is absent from a discrete acceptance or probability vector.
    UnknownLabel { label: String },
    /// Vector, matrix, or grid dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// The operation is not defined for the given combination of inputs.
    Unsupported { reason: String },
    /// Adaptive quadrature ran out of subdivisions before converging.
    QuadratureBudget { budget: usize },
    /// A matrix that must be symmetric positive definite is not.
    NotPositiveDefinite { name: &'static str },
    /// A pointwise product of distributions integrated or summed to zero.
    ZeroNormalizer,
}

impl fmt::Display for MoeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoeError::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            MoeError::EmptyInput { what } => write!(f, "empty input: {what}"),
            MoeError::LabelMismatch { expected, got } => {
                write!(f, "label sets differ: expected [{expected}], got [{got}]")
            }
            MoeError::UnknownLabel { label } => write!(f, "unknown label `{label}`"),
            MoeError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            MoeError::Unsupported { reason } => write!(f, "unsupported operation: {reason}"),
            MoeError::QuadratureBudget { budget } => {
                write!(f, "quadrature exceeded its budget of {budget} subdivisions")
            }
            MoeError::NotPositiveDefinite { name } => {
                write!(f, "matrix `{name}` is not symmetric positive definite")
            }
            MoeError::ZeroNormalizer => {
                write!(f, "distribution product has zero mass (disjoint supports)")
            }
        }
    }
}

impl std::error::Error for MoeError {}
