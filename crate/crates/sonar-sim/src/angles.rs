//! Compass-angle conventions used throughout the simulation.
//!
//! Bearings and headings are compass degrees: measured clockwise from
//! North, so 0 deg points along +y, 90 deg along +x. Internal trigonometry
//! works in radians; degrees appear only at the interfaces.

/// Wraps an angle in degrees onto [0, 360).
pub fn wrap_deg_360(angle: f64) -> f64 {
    let w = angle.rem_euclid(360.0);
    if w == 360.0 {
        0.0
    } else {
        w
    }
}

/// Wraps an angle in degrees onto [-180, 180), the natural range for
/// angular differences.
pub fn wrap_deg_180(angle: f64) -> f64 {
    (angle + 180.0).rem_euclid(360.0) - 180.0
}

/// Compass bearing in degrees from `(from_x, from_y)` to `(to_x, to_y)`.
pub fn compass_bearing_deg(from_x: f64, from_y: f64, to_x: f64, to_y: f64) -> f64 {
    let dx = to_x - from_x;
    let dy = to_y - from_y;
    wrap_deg_360(dx.atan2(dy).to_degrees())
}

/// Unit vector (x East, y North) pointing along a compass bearing given in
/// degrees.
pub fn compass_unit(bearing_deg: f64) -> (f64, f64) {
    let r = bearing_deg.to_radians();
    (r.sin(), r.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cardinal_bearings() {
        assert_abs_diff_eq!(compass_bearing_deg(0.0, 0.0, 0.0, 1.0), 0.0);
        assert_abs_diff_eq!(compass_bearing_deg(0.0, 0.0, 1.0, 0.0), 90.0);
        assert_abs_diff_eq!(compass_bearing_deg(0.0, 0.0, 0.0, -1.0), 180.0);
        assert_abs_diff_eq!(compass_bearing_deg(0.0, 0.0, -1.0, 0.0), 270.0);
        assert_abs_diff_eq!(compass_bearing_deg(0.0, 0.0, 1.0, 1.0), 45.0);
    }

    #[test]
    fn unit_vector_matches_bearing() {
        let (x, y) = compass_unit(0.0);
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y, 1.0);
        let (x, y) = compass_unit(90.0);
        assert_abs_diff_eq!(x, 1.0);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wrapping_ranges() {
        assert_abs_diff_eq!(wrap_deg_360(-90.0), 270.0);
        assert_abs_diff_eq!(wrap_deg_360(720.0), 0.0);
        assert_abs_diff_eq!(wrap_deg_180(350.0), -10.0);
        assert_abs_diff_eq!(wrap_deg_180(180.0), -180.0);
        assert!(wrap_deg_360(359.9999999) < 360.0);
    }

    #[test]
    fn bearing_round_trip_through_unit_vector() {
        for deg in [0.0, 17.0, 90.0, 133.7, 180.0, 271.2, 359.0] {
            let (x, y) = compass_unit(deg);
            let back = compass_bearing_deg(0.0, 0.0, x, y);
            assert_abs_diff_eq!(back, deg, epsilon = 1e-10);
        }
    }
}
