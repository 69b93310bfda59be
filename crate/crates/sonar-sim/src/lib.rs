//! A small tracking test-bed: two stationary passive bearing sensors
//! observe a handful of moving targets, synchronised bearing pairs are
//! triangulated into plan-position plots with covariance and fused
//! identity, and a constant-velocity Kalman filter turns the plots into
//! tracks.
//!
//! Every stage is a pure function over immutable inputs with an explicit
//! seed where randomness is involved, so whole pipelines are reproducible
//! and independent Monte Carlo runs can execute concurrently.

// Validation guards are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
mod error;
mod scenario;
mod sensor;
mod tracker;
mod triangulate;
mod types;

pub use error::SimError;
pub use scenario::{default_scenario, default_sensors, generate_scenario, Leg, ScenarioConfig, TargetConfig};
pub use sensor::simulate_sensor;
pub use tracker::{kinematics, run_tracker, Kinematics, HEADING_SPEED_FLOOR};
pub use triangulate::{fuse_identity, pair_and_triangulate, triangulate, MIN_CROSSING_SINE};
pub use types::{
    check_cov2, Allegiance, IdentityVector, Plot, SensorReport, SensorSpec, Track, TrackState,
    TrackerConfig, TruthRecord, IDENTITY_SUM_TOL,
};
