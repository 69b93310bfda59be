//! Error type for the assessment layer, wrapping the measure and
//! simulation errors it builds on.

use std::fmt;

use moe_core::MoeError;
use sonar_sim::SimError;

#[derive(Debug, Clone, PartialEq)]
pub enum AssessError {
    /// An error from the measures-of-effectiveness layer.
    Core(MoeError),
    /// An error from the simulation layer.
    Sim(SimError),
    /// A parameter value outside its legal range.
    InvalidParameter { name: &'static str, reason: String },
    /// An operation needs at least one element of the named input.
    EmptyInput { what: &'static str },
    /// A time instant where the two sides disagree about which users are
    /// present.
    MismatchedUsers { t: f64, reason: String },
    /// A true allegiance for which the user specifies no identity vector.
    UnknownAllegiance { label: String },
    /// A Monte Carlo run failed; the run index locates the seed.
    RunFailed { run_index: u32, reason: String },
}

impl fmt::Display for AssessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssessError::Core(e) => write!(f, "{e}"),
            AssessError::Sim(e) => write!(f, "{e}"),
            AssessError::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            AssessError::EmptyInput { what } => write!(f, "empty input: {what}"),
            AssessError::MismatchedUsers { t, reason } => {
                write!(f, "mismatched users at t = {t}: {reason}")
            }
            AssessError::UnknownAllegiance { label } => {
                write!(f, "no identity user function for true allegiance `{label}`")
            }
            AssessError::RunFailed { run_index, reason } => {
                write!(f, "run {run_index} failed: {reason}")
            }
        }
    }
}

impl std::error::Error for AssessError {}

impl From<MoeError> for AssessError {
    fn from(e: MoeError) -> Self {
        AssessError::Core(e)
    }
}

impl From<SimError> for AssessError {
    fn from(e: SimError) -> Self {
        AssessError::Sim(e)
    }
}
