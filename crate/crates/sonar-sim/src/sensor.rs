//! Low-fidelity passive sensor model: Bernoulli detection, Gaussian
//! bearing noise, and Dirichlet-distributed identity estimates.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution, Normal};

use crate::angles::{compass_bearing_deg, wrap_deg_360};
use crate::error::SimError;
use crate::types::{IdentityVector, SensorReport, SensorSpec, TruthRecord};

/// Base identity probability assigned to the true allegiance before the
/// concentration scaling; the remainder is split over the other two.
const IDENTITY_BASE_TRUE: f64 = 0.8;
const IDENTITY_BASE_OTHER: f64 = 0.1;

/// Runs one sensor over the truth records, in order. Each record is
/// detected with probability `spec.detection_prob`; a detection yields the
/// true compass bearing from the sensor plus zero-mean Gaussian noise, and
/// an identity vector drawn from a Dirichlet centred on the true
/// allegiance. The same seed always reproduces the same reports.
pub fn simulate_sensor(
    truth: &[TruthRecord],
    spec: &SensorSpec,
    seed: u64,
) -> Result<Vec<SensorReport>, SimError> {
    spec.validate()?;
    let noise = Normal::new(0.0, spec.bearing_sigma_deg).map_err(|e| {
        SimError::InvalidParameter {
            name: "bearing_sigma_deg",
            reason: e.to_string(),
        }
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::new();
    for rec in truth {
        if !rng.random_bool(spec.detection_prob) {
            continue;
        }
        let true_bearing = compass_bearing_deg(spec.x, spec.y, rec.x, rec.y);
        let bearing_deg = wrap_deg_360(true_bearing + noise.sample(&mut rng));

        let mut alpha = [IDENTITY_BASE_OTHER * spec.identity_concentration; 3];
        alpha[rec.allegiance.index()] = IDENTITY_BASE_TRUE * spec.identity_concentration;
        let dirichlet =
            Dirichlet::new(alpha).map_err(|e| SimError::InvalidParameter {
                name: "identity_concentration",
                reason: e.to_string(),
            })?;
        let identity = IdentityVector::new(dirichlet.sample(&mut rng))?;

        reports.push(SensorReport {
            t: rec.t,
            sensor_id: spec.id,
            target_label: rec.target_id,
            bearing_deg,
            identity,
        });
    }
    Ok(reports)
}
