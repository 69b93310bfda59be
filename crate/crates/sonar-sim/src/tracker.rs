//! Constant-velocity Kalman filtering of plots into tracks, plus the
//! kinematic read-out of a filtered state.

use nalgebra::{Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};

use crate::angles::wrap_deg_360;
use crate::error::SimError;
use crate::types::{check_cov2, Plot, Track, TrackState, TrackerConfig};

/// Speeds below this have no meaningful course.
pub const HEADING_SPEED_FLOOR: f64 = 1e-9;

/// Position, speed, and course extracted from a `[x, y, vx, vy]` state.
/// `heading_deg` is `None` when the speed is too small to define one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    pub heading_deg: Option<f64>,
}

/// Reads position, speed over ground, and compass course from a state
/// vector.
pub fn kinematics(state: &Vector4<f64>) -> Kinematics {
    let vx = state[2];
    let vy = state[3];
    let speed = vx.hypot(vy);
    let heading_deg = if speed < HEADING_SPEED_FLOOR {
        None
    } else {
        Some(wrap_deg_360(vx.atan2(vy).to_degrees()))
    };
    Kinematics {
        x: state[0],
        y: state[1],
        speed,
        heading_deg,
    }
}

/// Filters one target's time-ordered plots into a track.
///
/// The model is constant velocity in the plane with state `[x, y, vx, vy]`
/// and piecewise-white-noise-acceleration process covariance scaled by
/// `cfg.q`. Measurements are plot positions with the plot covariance as
/// measurement noise. The filter initializes on the first plot with zero
/// velocity and `cfg.initial_velocity_sigma^2` velocity variance, so the
/// first state is the initialization itself.
pub fn run_tracker(plots: &[Plot], track_id: u32, cfg: &TrackerConfig) -> Result<Track, SimError> {
    let (states, _) = filter_plots(plots, cfg)?;
    Ok(Track {
        track_id,
        target_label: plots[0].target_label,
        states,
    })
}

/// The filter core, also reporting the normalized innovation squared of
/// every update for consistency checks.
fn filter_plots(
    plots: &[Plot],
    cfg: &TrackerConfig,
) -> Result<(Vec<TrackState>, Vec<f64>), SimError> {
    cfg.validate()?;
    if plots.is_empty() {
        return Err(SimError::EmptyInput { what: "plots" });
    }
    let label = plots[0].target_label;
    for pair in plots.windows(2) {
        if pair[1].t < pair[0].t {
            return Err(SimError::InvalidParameter {
                name: "plots",
                reason: format!("not time-ordered at t = {}", pair[1].t),
            });
        }
    }
    for plot in plots {
        if plot.target_label != label {
            return Err(SimError::TargetMismatch {
                expected: label,
                got: plot.target_label,
            });
        }
        check_cov2("plot covariance", &plot.cov)?;
    }

    let first = &plots[0];
    let mut state = Vector4::new(first.x, first.y, 0.0, 0.0);
    let v_var = cfg.initial_velocity_sigma * cfg.initial_velocity_sigma;
    let mut cov = Matrix4::zeros();
    cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&first.cov);
    cov[(2, 2)] = v_var;
    cov[(3, 3)] = v_var;

    let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let identity4 = Matrix4::identity();

    let mut states = Vec::with_capacity(plots.len());
    let mut nis = Vec::with_capacity(plots.len().saturating_sub(1));
    states.push(TrackState {
        t: first.t,
        state,
        cov,
        identity: first.identity,
    });

    let mut last_t = first.t;
    for plot in &plots[1..] {
        let dt = plot.t - last_t;
        last_t = plot.t;

        let f = transition(dt);
        let q = process_noise(dt, cfg.q);
        state = f * state;
        cov = f * cov * f.transpose() + q;

        let z = Vector2::new(plot.x, plot.y);
        let innovation = z - h * state;
        let s = h * cov * h.transpose() + plot.cov;
        let s_inv = s.try_inverse().ok_or(SimError::NotPsd {
            name: "innovation covariance",
        })?;
        let gain: Matrix4x2<f64> = cov * h.transpose() * s_inv;

        state += gain * innovation;
        let shrink = identity4 - gain * h;
        cov = shrink * cov * shrink.transpose() + gain * plot.cov * gain.transpose();
        cov = 0.5 * (cov + cov.transpose());

        nis.push((innovation.transpose() * s_inv * innovation)[(0, 0)]);
        states.push(TrackState {
            t: plot.t,
            state,
            cov,
            identity: plot.identity,
        });
    }
    Ok((states, nis))
}

fn transition(dt: f64) -> Matrix4<f64> {
    Matrix4::new(
        1.0, 0.0, dt, 0.0, //
        0.0, 1.0, 0.0, dt, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

fn process_noise(dt: f64, q: f64) -> Matrix4<f64> {
    let dt2 = dt * dt;
    let q11 = q * dt2 * dt2 / 4.0;
    let q13 = q * dt2 * dt / 2.0;
    let q33 = q * dt2;
    Matrix4::new(
        q11, 0.0, q13, 0.0, //
        0.0, q11, 0.0, q13, //
        q13, 0.0, q33, 0.0, //
        0.0, q13, 0.0, q33,
    )
}
