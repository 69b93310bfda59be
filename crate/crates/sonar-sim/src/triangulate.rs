//! Triangulation of synchronised bearing pairs into plan-position plots,
//! with first-order covariance propagation and identity fusion.

use nalgebra::Matrix2;

use crate::angles::compass_unit;
use crate::error::SimError;
use crate::types::{IdentityVector, Plot, SensorReport, SensorSpec};

/// Bearing pairs whose crossing angle has |sin| below this are treated as
/// unusable geometry and produce no plot.
pub const MIN_CROSSING_SINE: f64 = 1e-3;

/// Conservative arithmetic average of two identity vectors.
pub fn fuse_identity(v1: &IdentityVector, v2: &IdentityVector) -> IdentityVector {
    let a = v1.probs();
    let b = v2.probs();
    let mean = [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ];
    IdentityVector::new(mean).expect("mean of two distributions stays on the simplex")
}

/// Intersects the bearing lines from two synchronised reports of the same
/// target. Returns `Ok(None)` when the rays are too close to parallel for
/// the intersection to mean anything.
///
/// The covariance is the linearised image of the independent bearing
/// noises: `J diag(sigma1^2, sigma2^2) J^T`, with the Jacobian `J` of the
/// intersection point taken with respect to the two bearings in radians.
pub fn triangulate(
    r1: &SensorReport,
    r2: &SensorReport,
    s1: &SensorSpec,
    s2: &SensorSpec,
) -> Result<Option<Plot>, SimError> {
    s1.validate()?;
    s2.validate()?;
    if r1.t != r2.t {
        return Err(SimError::TimeMismatch { t1: r1.t, t2: r2.t });
    }
    if r1.target_label != r2.target_label {
        return Err(SimError::TargetMismatch {
            expected: r1.target_label,
            got: r2.target_label,
        });
    }
    if r1.sensor_id != s1.id || r2.sensor_id != s2.id {
        return Err(SimError::InvalidParameter {
            name: "sensor_id",
            reason: "reports must be paired with their own sensor specs".into(),
        });
    }
    if s1.id == s2.id || (s1.x == s2.x && s1.y == s2.y) {
        return Err(SimError::InvalidParameter {
            name: "sensors",
            reason: "triangulation needs two distinct sensor positions".into(),
        });
    }

    let (u1x, u1y) = compass_unit(r1.bearing_deg);
    let (u2x, u2y) = compass_unit(r2.bearing_deg);
    let dx = s2.x - s1.x;
    let dy = s2.y - s1.y;

    let cross = u1x * u2y - u1y * u2x;
    if cross.abs() < MIN_CROSSING_SINE {
        return Ok(None);
    }

    let numer = dx * u2y - dy * u2x;
    let range1 = numer / cross;
    let x = s1.x + range1 * u1x;
    let y = s1.y + range1 * u1y;

    // Partial derivatives with respect to the bearings in radians. With
    // u' = (cos b, -sin b), the cross products reduce to
    // d(cross)/db1 = cos(b1 - b2) and d(cross)/db2 = -cos(b1 - b2).
    let cos_delta = u1y * u2y + u1x * u2x;
    let da_db1 = -range1 * cos_delta / cross;
    let dn_db2 = -dx * u2x - dy * u2y;
    let da_db2 = (dn_db2 + range1 * cos_delta) / cross;

    let j = Matrix2::new(
        da_db1 * u1x + range1 * u1y,
        da_db2 * u1x,
        da_db1 * u1y - range1 * u1x,
        da_db2 * u1y,
    );
    let s1_rad = s1.bearing_sigma_deg.to_radians();
    let s2_rad = s2.bearing_sigma_deg.to_radians();
    let noise = Matrix2::new(s1_rad * s1_rad, 0.0, 0.0, s2_rad * s2_rad);
    let cov = j * noise * j.transpose();
    let cov = 0.5 * (cov + cov.transpose());

    Ok(Some(Plot {
        t: r1.t,
        target_label: r1.target_label,
        x,
        y,
        cov,
        identity: fuse_identity(&r1.identity, &r2.identity),
    }))
}

/// Pairs two sensors' report streams by exact time and target label and
/// triangulates every pair. Unmatched reports and unusable geometries are
/// dropped, which downstream stages see as missing data. Plots come back
/// ordered by time, then target label.
pub fn pair_and_triangulate(
    reports1: &[SensorReport],
    reports2: &[SensorReport],
    s1: &SensorSpec,
    s2: &SensorSpec,
) -> Result<Vec<Plot>, SimError> {
    let mut by_key = std::collections::HashMap::new();
    for r in reports2 {
        by_key.insert((r.t.to_bits(), r.target_label), r);
    }
    let mut plots = Vec::new();
    for r1 in reports1 {
        if let Some(r2) = by_key.get(&(r1.t.to_bits(), r1.target_label)) {
            if let Some(plot) = triangulate(r1, r2, s1, s2)? {
                plots.push(plot);
            }
        }
    }
    plots.sort_by(|a, b| {
        (a.t, a.target_label)
            .partial_cmp(&(b.t, b.target_label))
            .expect("finite plot times")
    });
    Ok(plots)
}
