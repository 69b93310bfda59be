//! Effectiveness assessment over tracking runs.
//!
//! This crate turns tracks and truth into per-instant, per-user
//! effectiveness records, aggregates them over targets and variables,
//! combines multiple users' views, drives Monte Carlo repetitions of the
//! whole pipeline, and tests whether two configurations differ
//! significantly at each time instant.

mod aggregate;
mod combine;
mod error;
mod montecarlo;
mod series;
mod significance;
mod users;

pub use aggregate::{aggregate, AggregationScheme};
pub use combine::{combine_users, CombineMode};
pub use error::AssessError;
pub use montecarlo::{
    default_plan, monte_carlo, run_pipeline, sensor_seeds, RunOutput, SimulationPlan,
    TrackerVariant,
};
pub use series::{compute_moe_series, MoeRecord, Variable};
pub use significance::{
    significance_test, t_quantile_two_sided, SignificanceReport, SignificanceRow,
};
pub use users::{default_users, UserSpec};
