//! Per-instant effectiveness of tracks against truth, one record per
//! (time, tracker, target, user, variable).

use std::collections::HashMap;

use moe_core::{moe_discrete, moe_point, DiscreteProbability, Moe};
use sonar_sim::angles::wrap_deg_180;
use sonar_sim::{kinematics, Allegiance, Track, TruthRecord};

use crate::error::AssessError;
use crate::users::UserSpec;

/// The assessed variables, in their fixed reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    Position,
    Speed,
    Heading,
    Identity,
    /// An aggregate over variables rather than a single one.
    Combined,
}

impl Variable {
    pub const SINGLE: [Variable; 4] = [
        Variable::Position,
        Variable::Speed,
        Variable::Heading,
        Variable::Identity,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Variable::Position => "position",
            Variable::Speed => "speed",
            Variable::Heading => "heading",
            Variable::Identity => "identity",
            Variable::Combined => "combined",
        }
    }

    pub fn from_label(label: &str) -> Result<Self, AssessError> {
        match label {
            "position" => Ok(Variable::Position),
            "speed" => Ok(Variable::Speed),
            "heading" => Ok(Variable::Heading),
            "identity" => Ok(Variable::Identity),
            "combined" => Ok(Variable::Combined),
            other => Err(AssessError::InvalidParameter {
                name: "variable",
                reason: format!("unknown variable `{other}`"),
            }),
        }
    }

    /// Position of a single variable in the fixed reporting order;
    /// `Combined` sorts last.
    pub fn order_key(&self) -> usize {
        match self {
            Variable::Position => 0,
            Variable::Speed => 1,
            Variable::Heading => 2,
            Variable::Identity => 3,
            Variable::Combined => 4,
        }
    }
}

/// One effectiveness value. `target_id` and `user_id` are `None` on
/// records aggregated over targets or users respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct MoeRecord {
    pub t: f64,
    pub tracker_id: u32,
    pub target_id: Option<u32>,
    pub user_id: Option<u32>,
    pub variable: Variable,
    pub moe: Moe,
    pub run_index: u32,
}

/// Scores every track state against the truth record for the same target
/// and instant, once per user and per variable.
///
/// Instants without a track state produce no records, so gaps in
/// detection or geometry propagate as absent data. A state whose speed is
/// too small to define a course produces no heading record.
pub fn compute_moe_series(
    tracks: &[Track],
    truth: &[TruthRecord],
    users: &[UserSpec],
    tracker_id: u32,
    run_index: u32,
) -> Result<Vec<MoeRecord>, AssessError> {
    if users.is_empty() {
        return Err(AssessError::EmptyInput { what: "users" });
    }
    let mut truth_at: HashMap<(u32, u64), &TruthRecord> = HashMap::new();
    for rec in truth {
        truth_at.insert((rec.target_id, rec.t.to_bits()), rec);
    }

    let mut records = Vec::new();
    for track in tracks {
        for state in &track.states {
            let Some(truth_rec) = truth_at.get(&(track.target_label, state.t.to_bits())) else {
                continue;
            };
            let kin = kinematics(&state.state);
            let position_error =
                (kin.x - truth_rec.x).hypot(kin.y - truth_rec.y);
            let speed_error = kin.speed - truth_rec.speed;
            let heading_error = kin
                .heading_deg
                .map(|h| wrap_deg_180(h - truth_rec.heading_deg));
            let observed_identity = DiscreteProbability::new(
                Allegiance::LABELS.iter().map(|s| s.to_string()).collect(),
                state.identity.probs().to_vec(),
            )?;

            for user in users {
                let mut push = |variable: Variable, moe: Moe| {
                    records.push(MoeRecord {
                        t: state.t,
                        tracker_id,
                        target_id: Some(track.target_label),
                        user_id: Some(user.user_id),
                        variable,
                        moe,
                        run_index,
                    });
                };
                push(
                    Variable::Position,
                    moe_point(&user.position, &[position_error])?,
                );
                push(Variable::Speed, moe_point(&user.speed, &[speed_error])?);
                if let Some(err) = heading_error {
                    push(Variable::Heading, moe_point(&user.heading, &[err])?);
                }
                let acceptance = user.identity_for(truth_rec.allegiance)?;
                push(
                    Variable::Identity,
                    moe_discrete(acceptance, &observed_identity)?,
                );
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::users::default_users;
    use approx::assert_abs_diff_eq;
    use nalgebra::{Matrix4, Vector4};
    use sonar_sim::{IdentityVector, TrackState};

    fn truth_record(allegiance: Allegiance) -> TruthRecord {
        TruthRecord {
            t: 10.0,
            target_id: 1,
            x: 1000.0,
            y: 2000.0,
            speed: 5.0,
            heading_deg: 90.0,
            allegiance,
        }
    }

    fn track_with(state: Vector4<f64>, identity: [f64; 3]) -> Track {
        Track {
            track_id: 1,
            target_label: 1,
            states: vec![TrackState {
                t: 10.0,
                state,
                cov: Matrix4::identity(),
                identity: IdentityVector::new(identity).unwrap(),
            }],
        }
    }

    fn find(records: &[MoeRecord], user: u32, variable: Variable) -> f64 {
        records
            .iter()
            .find(|r| r.user_id == Some(user) && r.variable == variable)
            .unwrap()
            .moe
            .value()
    }

    #[test]
    fn perfect_state_scores_one_everywhere_for_user_one() {
        let truth = vec![truth_record(Allegiance::Enemy)];
        let track = track_with(Vector4::new(1000.0, 2000.0, 5.0, 0.0), [1.0, 0.0, 0.0]);
        let users = default_users().unwrap();
        let records = compute_moe_series(&[track], &truth, &users, 1, 0).unwrap();
        assert_eq!(records.len(), 8);
        assert_abs_diff_eq!(find(&records, 1, Variable::Position), 1.0);
        assert_abs_diff_eq!(find(&records, 1, Variable::Speed), 1.0);
        assert_abs_diff_eq!(find(&records, 1, Variable::Heading), 1.0);
        assert_abs_diff_eq!(find(&records, 2, Variable::Identity), 1.0);
    }

    #[test]
    fn strict_user_reads_off_the_enemy_probability() {
        let truth = vec![truth_record(Allegiance::Enemy)];
        let track = track_with(Vector4::new(1000.0, 2000.0, 5.0, 0.0), [0.60, 0.25, 0.15]);
        let users = default_users().unwrap();
        let records = compute_moe_series(&[track], &truth, &users, 1, 0).unwrap();
        assert_abs_diff_eq!(find(&records, 2, Variable::Identity), 0.60);
        assert_abs_diff_eq!(
            find(&records, 1, Variable::Identity),
            0.6 * 0.60 + 0.2 * 0.25 + 0.2 * 0.15
        );
    }

    #[test]
    fn heading_error_wraps_before_scoring() {
        let mut truth = truth_record(Allegiance::Friend);
        truth.heading_deg = 0.0;
        // Course 359 deg against truth 0 deg is a -1 deg error.
        let vx = (359.0f64).to_radians().sin() * 5.0;
        let vy = (359.0f64).to_radians().cos() * 5.0;
        let track = track_with(Vector4::new(1000.0, 2000.0, vx, vy), [0.0, 0.0, 1.0]);
        let users = default_users().unwrap();
        let records = compute_moe_series(&[track], &[truth], &users, 1, 0).unwrap();
        assert_abs_diff_eq!(
            find(&records, 1, Variable::Heading),
            (-1.0f64 / 50.0).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn stationary_state_emits_no_heading_record() {
        let truth = vec![truth_record(Allegiance::Enemy)];
        let track = track_with(Vector4::new(1000.0, 2000.0, 0.0, 0.0), [1.0, 0.0, 0.0]);
        let users = default_users().unwrap();
        let records = compute_moe_series(&[track], &truth, &users, 1, 0).unwrap();
        assert!(records
            .iter()
            .all(|r| r.variable != Variable::Heading));
        assert_eq!(records.len(), 6);
    }

    #[test]
    fn neutral_truth_is_rejected() {
        let truth = vec![truth_record(Allegiance::Neutral)];
        let track = track_with(Vector4::new(0.0, 0.0, 1.0, 0.0), [0.2, 0.6, 0.2]);
        let users = default_users().unwrap();
        assert!(matches!(
            compute_moe_series(&[track], &truth, &users, 1, 0),
            Err(AssessError::UnknownAllegiance { .. })
        ));
    }

    #[test]
    fn states_without_matching_truth_are_skipped() {
        let truth = vec![truth_record(Allegiance::Enemy)];
        let mut track = track_with(Vector4::new(0.0, 0.0, 1.0, 0.0), [1.0, 0.0, 0.0]);
        track.states[0].t = 11.0;
        let users = default_users().unwrap();
        let records = compute_moe_series(&[track], &truth, &users, 1, 0).unwrap();
        assert!(records.is_empty());
    }
}
