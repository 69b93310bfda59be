//! Measures of effectiveness: scoring system outputs against user needs.
//!
//! The central quantity is a measure of effectiveness (MOE), the expected
//! acceptance of a system's output under the distribution of what the
//! system actually reported. Acceptance is described by a [`UserFunction`],
//! the report by an [`ObservationDistribution`], and the resulting [`Moe`]
//! is always a value in [0, 1].
//!
//! Beyond the single-user integral ([`moe_integrate`] and its closed-form
//! shortcuts), the crate covers combining several users into one composed
//! acceptance function ([`combine_user_functions`]), merging independent
//! reports ([`combine_observation_pdfs`]), and scoring against a reference
//! measurement that is itself uncertain ([`moe_uncertain_truth_gaussian`],
//! [`moe_uncertain_truth_sampled`]).
//!
//! Everything here is pure and deterministic; the only randomness is the
//! explicitly seeded Monte Carlo estimator for uncertain references.

mod error;
mod moe;
mod multiuser;
mod observation;
mod quadrature;
mod truth;
mod user_function;

pub use error::MoeError;
pub use moe::{
    combine_geometric, combine_product, coverage_fraction, moe_dependent_sampled, moe_discrete,
    moe_gaussian_closed, moe_ignorance_association, moe_point, moe_sample_mean, moe_sets,
    moe_window_gaussian, Moe,
};
pub use multiuser::{
    combine_observation_pdfs, combine_user_functions, moe_multiuser, UserCombination,
};
pub use observation::{
    DiscreteProbability, GridDensity, ObservationDistribution, GRID_MASS_TOL,
    PROBABILITY_SUM_TOL,
};
pub use quadrature::{
    marginalize_grid, moe_integrate, DEFAULT_ABS_TOL, GAUSSIAN_TAIL_SIGMAS, SUBDIVISION_BUDGET,
};
pub use truth::{
    moe_uncertain_truth_gaussian, moe_uncertain_truth_sampled, PairedObservation,
    ReferenceErrorModel, SampledEstimate, DEFAULT_TRUTH_SAMPLES,
};
pub use user_function::{DiscreteAcceptance, UserFunction};
