//! User requirement profiles: one acceptance function per assessed
//! variable plus identity acceptance vectors selected by the target's true
//! allegiance.

use moe_core::{DiscreteAcceptance, MoeError, UserFunction};
use sonar_sim::Allegiance;

use crate::error::AssessError;

/// One user's requirements across the assessed variables. The identity
/// vectors state how acceptable each declared class (E, N, F) is when the
/// target is truly an enemy or truly a friend.
#[derive(Debug, Clone)]
pub struct UserSpec {
    pub user_id: u32,
    /// Acceptance of the Euclidean position error, metres.
    pub position: UserFunction,
    /// Acceptance of the speed error, m/s.
    pub speed: UserFunction,
    /// Acceptance of the heading error, degrees in [-180, 180).
    pub heading: UserFunction,
    /// Identity acceptance when the target is truly an enemy.
    pub identity_enemy: DiscreteAcceptance,
    /// Identity acceptance when the target is truly a friend.
    pub identity_friend: DiscreteAcceptance,
}

impl UserSpec {
    /// The identity acceptance vector to apply for a target whose true
    /// allegiance is `truth`. Neutral targets have no defined vector.
    pub fn identity_for(&self, truth: Allegiance) -> Result<&DiscreteAcceptance, AssessError> {
        match truth {
            Allegiance::Enemy => Ok(&self.identity_enemy),
            Allegiance::Friend => Ok(&self.identity_friend),
            Allegiance::Neutral => Err(AssessError::UnknownAllegiance {
                label: truth.label().to_string(),
            }),
        }
    }
}

fn identity_vector(values: [f64; 3]) -> Result<DiscreteAcceptance, MoeError> {
    DiscreteAcceptance::new(
        Allegiance::LABELS.iter().map(|s| s.to_string()).collect(),
        values.to_vec(),
    )
}

/// The stock pair of users.
///
/// User 1 grades errors on bell curves (position sigma 0.5 m, speed sigma
/// 2 m/s, heading sigma 5 deg) and is lenient about identity. User 2
/// grades errors on heavy-tailed curves that drop to one half at 0.2 m,
/// 1 m/s, and 2 deg, and insists on the correct declared class.
pub fn default_users() -> Result<Vec<UserSpec>, AssessError> {
    Ok(vec![
        UserSpec {
            user_id: 1,
            position: UserFunction::gaussian_exp(0.5)?,
            speed: UserFunction::gaussian_exp(2.0)?,
            heading: UserFunction::gaussian_exp(5.0)?,
            identity_enemy: identity_vector([0.6, 0.2, 0.2])?,
            identity_friend: identity_vector([0.2, 0.2, 0.6])?,
        },
        UserSpec {
            user_id: 2,
            position: UserFunction::rational_half(0.2)?,
            speed: UserFunction::rational_half(1.0)?,
            heading: UserFunction::rational_half(2.0)?,
            identity_enemy: identity_vector([1.0, 0.0, 0.0])?,
            identity_friend: identity_vector([0.0, 0.0, 1.0])?,
        },
    ])
}
