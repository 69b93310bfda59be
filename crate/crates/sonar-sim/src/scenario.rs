//! Ground-truth generation from piecewise-constant-velocity leg plans.

use crate::angles::{compass_unit, wrap_deg_360};
use crate::error::SimError;
use crate::types::{Allegiance, SensorSpec, TruthRecord};

/// One constant-velocity segment of a target's plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    /// Speed over ground, m/s.
    pub speed: f64,
    /// Compass heading, degrees.
    pub heading_deg: f64,
    /// Time spent on this leg, seconds.
    pub duration: f64,
}

/// A target's starting state, allegiance, and motion plan.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetConfig {
    pub target_id: u32,
    pub start_x: f64,
    pub start_y: f64,
    pub allegiance: Allegiance,
    pub legs: Vec<Leg>,
}

/// The full scenario: every target plus the truth sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Sampling interval for truth records, seconds.
    pub dt: f64,
    pub targets: Vec<TargetConfig>,
}

/// Slack when deciding whether the final sample lands on the plan's end.
const STEP_COUNT_SLACK: f64 = 1e-9;

/// Samples every target's piecewise-constant-velocity plan on the common
/// `dt` grid. Records are ordered by time, then by target id; each
/// target's records run from t = 0 to the end of its own plan.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Vec<TruthRecord>, SimError> {
    if config.targets.is_empty() {
        return Err(SimError::EmptyInput { what: "targets" });
    }
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(SimError::InvalidParameter {
            name: "dt",
            reason: format!("must be positive and finite, got {}", config.dt),
        });
    }
    let mut ids = std::collections::HashSet::new();
    for target in &config.targets {
        if !ids.insert(target.target_id) {
            return Err(SimError::InvalidParameter {
                name: "target_id",
                reason: format!("duplicate target id {}", target.target_id),
            });
        }
        validate_target(target)?;
    }

    let mut records = Vec::new();
    for target in &config.targets {
        let total: f64 = target.legs.iter().map(|l| l.duration).sum();
        let steps = (total / config.dt + STEP_COUNT_SLACK).floor() as usize;
        for i in 0..=steps {
            let t = i as f64 * config.dt;
            records.push(sample_target(target, t));
        }
    }
    records.sort_by(|a, b| {
        (a.t, a.target_id)
            .partial_cmp(&(b.t, b.target_id))
            .expect("finite times")
    });
    Ok(records)
}

fn validate_target(target: &TargetConfig) -> Result<(), SimError> {
    if !target.start_x.is_finite() || !target.start_y.is_finite() {
        return Err(SimError::InvalidParameter {
            name: "start position",
            reason: format!("must be finite for target {}", target.target_id),
        });
    }
    if target.legs.is_empty() {
        return Err(SimError::EmptyInput { what: "legs" });
    }
    for leg in &target.legs {
        if !(leg.duration > 0.0) || !leg.duration.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "leg duration",
                reason: format!("must be positive and finite, got {}", leg.duration),
            });
        }
        if !(leg.speed >= 0.0) || !leg.speed.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "leg speed",
                reason: format!("must be non-negative and finite, got {}", leg.speed),
            });
        }
        if !leg.heading_deg.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "leg heading",
                reason: "must be finite".into(),
            });
        }
    }
    Ok(())
}

/// State of one target at time `t` into its plan. At a leg boundary the
/// new leg's speed and heading apply; past the last leg the final leg's do.
fn sample_target(target: &TargetConfig, t: f64) -> TruthRecord {
    let mut x = target.start_x;
    let mut y = target.start_y;
    let mut remaining = t;
    let mut active = *target.legs.last().expect("validated non-empty");
    for leg in &target.legs {
        let (ux, uy) = compass_unit(leg.heading_deg);
        if remaining < leg.duration {
            x += leg.speed * ux * remaining;
            y += leg.speed * uy * remaining;
            active = *leg;
            break;
        }
        x += leg.speed * ux * leg.duration;
        y += leg.speed * uy * leg.duration;
        remaining -= leg.duration;
    }
    TruthRecord {
        t,
        target_id: target.target_id,
        x,
        y,
        speed: active.speed,
        heading_deg: wrap_deg_360(active.heading_deg),
        allegiance: target.allegiance,
    }
}

/// The stock two-target scenario: a friendly and an enemy target a few
/// kilometres apart, both initially heading East at patrol speed, each
/// easing onto a diverging course halfway through.
pub fn default_scenario() -> ScenarioConfig {
    ScenarioConfig {
        dt: 10.0,
        targets: vec![
            TargetConfig {
                target_id: 1,
                start_x: -6000.0,
                start_y: 14000.0,
                allegiance: Allegiance::Friend,
                legs: vec![
                    Leg {
                        speed: 5.0,
                        heading_deg: 90.0,
                        duration: 400.0,
                    },
                    Leg {
                        speed: 5.0,
                        heading_deg: 60.0,
                        duration: 400.0,
                    },
                ],
            },
            TargetConfig {
                target_id: 2,
                start_x: -6000.0,
                start_y: 10000.0,
                allegiance: Allegiance::Enemy,
                legs: vec![
                    Leg {
                        speed: 5.0,
                        heading_deg: 90.0,
                        duration: 400.0,
                    },
                    Leg {
                        speed: 5.0,
                        heading_deg: 120.0,
                        duration: 400.0,
                    },
                ],
            },
        ],
    }
}

/// The stock sensor pair: a 20 km East-West baseline South of the
/// default scenario's traffic.
pub fn default_sensors() -> [SensorSpec; 2] {
    [
        SensorSpec {
            id: 1,
            x: -10000.0,
            y: 0.0,
            bearing_sigma_deg: 1.0,
            detection_prob: 0.9,
            identity_concentration: 20.0,
        },
        SensorSpec {
            id: 2,
            x: 10000.0,
            y: 0.0,
            bearing_sigma_deg: 1.0,
            detection_prob: 0.9,
            identity_concentration: 20.0,
        },
    ]
}
