//! Error type shared by the simulation pipeline stages.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A configuration or argument value is out of its legal range.
    InvalidParameter { name: &'static str, reason: String },
    /// An operation needs at least one element of the named input.
    EmptyInput { what: &'static str },
    /// Two reports that must be time-synchronised are not.
    TimeMismatch { t1: f64, t2: f64 },
    /// Two inputs that must refer to the same target do not.
    TargetMismatch { expected: u32, got: u32 },
    /// An allegiance or identity label outside {E, N, F}.
    UnknownLabel { label: String },
    /// A covariance that must be symmetric positive semi-definite is not.
    NotPsd { name: &'static str },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            SimError::EmptyInput { what } => write!(f, "empty input: {what}"),
            SimError::TimeMismatch { t1, t2 } => {
                write!(f, "reports are not time-synchronised: {t1} s vs {t2} s")
            }
            SimError::TargetMismatch { expected, got } => {
                write!(f, "reports refer to different targets: {expected} vs {got}")
            }
            SimError::UnknownLabel { label } => write!(f, "unknown label `{label}`"),
            SimError::NotPsd { name } => {
                write!(f, "`{name}` must be symmetric positive semi-definite")
            }
        }
    }
}

impl std::error::Error for SimError {}
