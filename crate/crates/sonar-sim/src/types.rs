//! Domain records flowing through the pipeline: ground truth, sensor
//! reports, triangulated plots, and tracks.

use nalgebra::{Matrix2, Matrix4, Vector4};

use crate::error::SimError;

/// Tolerance for accepting an identity vector as normalized.
pub const IDENTITY_SUM_TOL: f64 = 1e-9;

/// Target allegiance categories, in the fixed label order (E, N, F).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Allegiance {
    Enemy,
    Neutral,
    Friend,
}

impl Allegiance {
    pub const ALL: [Allegiance; 3] = [Allegiance::Enemy, Allegiance::Neutral, Allegiance::Friend];
    pub const LABELS: [&'static str; 3] = ["E", "N", "F"];

    pub fn label(&self) -> &'static str {
        Self::LABELS[self.index()]
    }

    pub fn index(&self) -> usize {
        match self {
            Allegiance::Enemy => 0,
            Allegiance::Neutral => 1,
            Allegiance::Friend => 2,
        }
    }

    pub fn from_label(label: &str) -> Result<Self, SimError> {
        match label {
            "E" => Ok(Allegiance::Enemy),
            "N" => Ok(Allegiance::Neutral),
            "F" => Ok(Allegiance::Friend),
            other => Err(SimError::UnknownLabel {
                label: other.to_string(),
            }),
        }
    }
}

/// A probability vector over (E, N, F). Construction checks the simplex
/// constraint, so a value of this type is always a valid distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityVector {
    probs: [f64; 3],
}

impl IdentityVector {
    pub fn new(probs: [f64; 3]) -> Result<Self, SimError> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(SimError::InvalidParameter {
                name: "identity",
                reason: format!("entries must be finite and non-negative, got {probs:?}"),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > IDENTITY_SUM_TOL {
            return Err(SimError::InvalidParameter {
                name: "identity",
                reason: format!("entries sum to {sum}, expected 1"),
            });
        }
        Ok(Self { probs })
    }

    /// The distribution that puts all mass on one allegiance.
    pub fn certain(allegiance: Allegiance) -> Self {
        let mut probs = [0.0; 3];
        probs[allegiance.index()] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> [f64; 3] {
        self.probs
    }

    pub fn prob_of(&self, allegiance: Allegiance) -> f64 {
        self.probs[allegiance.index()]
    }

    /// The allegiance with the highest probability (lowest index wins ties).
    pub fn most_likely(&self) -> Allegiance {
        let mut best = 0;
        for i in 1..3 {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        Allegiance::ALL[best]
    }
}

/// One ground-truth sample for one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRecord {
    pub t: f64,
    pub target_id: u32,
    pub x: f64,
    pub y: f64,
    /// Speed over ground, m/s.
    pub speed: f64,
    /// Compass heading, degrees in [0, 360).
    pub heading_deg: f64,
    pub allegiance: Allegiance,
}

/// A stationary passive bearing sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    /// Standard deviation of bearing noise, degrees.
    pub bearing_sigma_deg: f64,
    /// Per-timestep probability that a target is detected.
    pub detection_prob: f64,
    /// Sharpness of simulated identity vectors; larger values concentrate
    /// the draws around the truth-weighted base vector.
    pub identity_concentration: f64,
}

impl SensorSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "sensor position",
                reason: "coordinates must be finite".into(),
            });
        }
        if !(self.bearing_sigma_deg > 0.0) || !self.bearing_sigma_deg.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "bearing_sigma_deg",
                reason: format!("must be positive and finite, got {}", self.bearing_sigma_deg),
            });
        }
        if !(0.0..=1.0).contains(&self.detection_prob) {
            return Err(SimError::InvalidParameter {
                name: "detection_prob",
                reason: format!("must lie in [0, 1], got {}", self.detection_prob),
            });
        }
        if !(self.identity_concentration > 0.0) || !self.identity_concentration.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "identity_concentration",
                reason: format!(
                    "must be positive and finite, got {}",
                    self.identity_concentration
                ),
            });
        }
        Ok(())
    }
}

/// One sensor's output for one detected target at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReport {
    pub t: f64,
    pub sensor_id: u32,
    pub target_label: u32,
    /// Measured compass bearing, degrees in [0, 360).
    pub bearing_deg: f64,
    pub identity: IdentityVector,
}

/// A plan-position estimate from triangulating two synchronised reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plot {
    pub t: f64,
    pub target_label: u32,
    pub x: f64,
    pub y: f64,
    /// Position covariance, m^2.
    pub cov: Matrix2<f64>,
    pub identity: IdentityVector,
}

/// One filtered state of a track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub t: f64,
    /// `[x, y, vx, vy]` in metres and m/s.
    pub state: Vector4<f64>,
    pub cov: Matrix4<f64>,
    pub identity: IdentityVector,
}

/// A time-ordered filtered history for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub track_id: u32,
    pub target_label: u32,
    pub states: Vec<TrackState>,
}

/// Kalman tracker tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Plant-noise intensity scaling the piecewise-white-noise-acceleration
    /// process covariance.
    pub q: f64,
    /// Standard deviation of the zero-velocity initialization, m/s.
    pub initial_velocity_sigma: f64,
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.q > 0.0) || !self.q.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "q",
                reason: format!("must be positive and finite, got {}", self.q),
            });
        }
        if !(self.initial_velocity_sigma >= 0.0) || !self.initial_velocity_sigma.is_finite() {
            return Err(SimError::InvalidParameter {
                name: "initial_velocity_sigma",
                reason: format!(
                    "must be non-negative and finite, got {}",
                    self.initial_velocity_sigma
                ),
            });
        }
        Ok(())
    }
}

/// Checks that a 2x2 covariance is symmetric and positive semi-definite
/// within a small numerical slack.
pub fn check_cov2(name: &'static str, m: &Matrix2<f64>) -> Result<(), SimError> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NotPsd { name });
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-9 * scale {
        return Err(SimError::NotPsd { name });
    }
    let slack = 1e-12 * scale;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if m[(0, 0)] < -slack || m[(1, 1)] < -slack || det < -slack * scale {
        return Err(SimError::NotPsd { name });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rejects_bad_vectors() {
        assert!(IdentityVector::new([0.5, 0.5, 0.1]).is_err());
        assert!(IdentityVector::new([-0.1, 0.6, 0.5]).is_err());
        assert!(IdentityVector::new([f64::NAN, 0.5, 0.5]).is_err());
        assert!(IdentityVector::new([0.2, 0.3, 0.5]).is_ok());
    }

    #[test]
    fn certain_identity_is_a_point_mass() {
        let v = IdentityVector::certain(Allegiance::Friend);
        assert_eq!(v.probs(), [0.0, 0.0, 1.0]);
        assert_eq!(v.most_likely(), Allegiance::Friend);
        assert_eq!(v.prob_of(Allegiance::Enemy), 0.0);
    }

    #[test]
    fn allegiance_labels_round_trip() {
        for a in Allegiance::ALL {
            assert_eq!(Allegiance::from_label(a.label()).unwrap(), a);
        }
        assert!(Allegiance::from_label("X").is_err());
    }

    #[test]
    fn sensor_spec_validation() {
        let good = SensorSpec {
            id: 1,
            x: 0.0,
            y: 0.0,
            bearing_sigma_deg: 1.0,
            detection_prob: 0.9,
            identity_concentration: 20.0,
        };
        assert!(good.validate().is_ok());
        assert!(SensorSpec {
            bearing_sigma_deg: 0.0,
            ..good
        }
        .validate()
        .is_err());
        assert!(SensorSpec {
            detection_prob: 1.5,
            ..good
        }
        .validate()
        .is_err());
        assert!(SensorSpec {
            identity_concentration: -1.0,
            ..good
        }
        .validate()
        .is_err());
    }

    #[test]
    fn covariance_check_catches_asymmetry_and_indefiniteness() {
        assert!(check_cov2("c", &Matrix2::new(1.0, 0.2, 0.2, 1.0)).is_ok());
        assert!(check_cov2("c", &Matrix2::new(1.0, 0.5, -0.5, 1.0)).is_err());
        assert!(check_cov2("c", &Matrix2::new(1.0, 2.0, 2.0, 1.0)).is_err());
        assert!(check_cov2("c", &Matrix2::new(-1.0, 0.0, 0.0, 1.0)).is_err());
        assert!(check_cov2("c", &Matrix2::zeros()).is_ok());
    }
}
