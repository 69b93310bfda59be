//! On-disk configuration for the pipeline: a TOML schema in which every
//! section has built-in defaults, so an empty file (or no file at all)
//! yields the stock two-target, two-sensor, two-tracker, two-user setup.
//! Unknown keys are rejected so a typo fails loudly instead of silently
//! falling back to a default.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use moe_assess::{SimulationPlan, TrackerVariant, UserSpec};
use moe_core::{DiscreteAcceptance, UserFunction};
use sonar_sim::{
    generate_scenario, Allegiance, Leg, ScenarioConfig, SensorSpec, TargetConfig, TrackerConfig,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub scenario: ScenarioSection,
    pub sensors: Vec<SensorSection>,
    pub trackers: Vec<TrackerSection>,
    pub users: Vec<UserSection>,
    pub monte_carlo: MonteCarloSection,
    pub significance: SignificanceSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scenario: ScenarioSection::default(),
            sensors: vec![
                SensorSection {
                    id: 1,
                    x: -10000.0,
                    y: 0.0,
                    bearing_sigma_deg: 1.0,
                    detection_prob: 0.9,
                    identity_concentration: 20.0,
                },
                SensorSection {
                    id: 2,
                    x: 10000.0,
                    y: 0.0,
                    bearing_sigma_deg: 1.0,
                    detection_prob: 0.9,
                    identity_concentration: 20.0,
                },
            ],
            trackers: vec![
                TrackerSection {
                    tracker_id: 1,
                    q: 1e-3,
                    initial_velocity_sigma: 5.0,
                },
                TrackerSection {
                    tracker_id: 2,
                    q: 1e-1,
                    initial_velocity_sigma: 5.0,
                },
            ],
            users: vec![
                UserSection {
                    user_id: 1,
                    position: UfSection {
                        kind: UfKindSection::Gaussian,
                        scale: 0.5,
                    },
                    speed: UfSection {
                        kind: UfKindSection::Gaussian,
                        scale: 2.0,
                    },
                    heading: UfSection {
                        kind: UfKindSection::Gaussian,
                        scale: 5.0,
                    },
                    identity_enemy: [0.6, 0.2, 0.2],
                    identity_friend: [0.2, 0.2, 0.6],
                },
                UserSection {
                    user_id: 2,
                    position: UfSection {
                        kind: UfKindSection::Rational,
                        scale: 0.2,
                    },
                    speed: UfSection {
                        kind: UfKindSection::Rational,
                        scale: 1.0,
                    },
                    heading: UfSection {
                        kind: UfKindSection::Rational,
                        scale: 2.0,
                    },
                    identity_enemy: [1.0, 0.0, 0.0],
                    identity_friend: [0.0, 0.0, 1.0],
                },
            ],
            monte_carlo: MonteCarloSection::default(),
            significance: SignificanceSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub dt: f64,
    pub targets: Vec<TargetSection>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            dt: 10.0,
            targets: vec![
                TargetSection {
                    target_id: 1,
                    start_x: -6000.0,
                    start_y: 14000.0,
                    allegiance: "F".to_string(),
                    legs: vec![
                        LegSection {
                            speed: 5.0,
                            heading_deg: 90.0,
                            duration: 400.0,
                        },
                        LegSection {
                            speed: 5.0,
                            heading_deg: 60.0,
                            duration: 400.0,
                        },
                    ],
                },
                TargetSection {
                    target_id: 2,
                    start_x: -6000.0,
                    start_y: 10000.0,
                    allegiance: "E".to_string(),
                    legs: vec![
                        LegSection {
                            speed: 5.0,
                            heading_deg: 90.0,
                            duration: 400.0,
                        },
                        LegSection {
                            speed: 5.0,
                            heading_deg: 120.0,
                            duration: 400.0,
                        },
                    ],
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub target_id: u32,
    pub start_x: f64,
    pub start_y: f64,
    /// Allegiance label: "E", "N", or "F".
    pub allegiance: String,
    pub legs: Vec<LegSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSection {
    pub speed: f64,
    pub heading_deg: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub bearing_sigma_deg: f64,
    pub detection_prob: f64,
    pub identity_concentration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerSection {
    pub tracker_id: u32,
    /// Plant noise intensity of the constant-velocity model.
    pub q: f64,
    pub initial_velocity_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    pub user_id: u32,
    pub position: UfSection,
    pub speed: UfSection,
    pub heading: UfSection,
    /// Acceptance of declared (E, N, F) when the target is truly an enemy.
    pub identity_enemy: [f64; 3],
    /// Acceptance of declared (E, N, F) when the target is truly a friend.
    pub identity_friend: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UfSection {
    pub kind: UfKindSection,
    /// Gaussian: the sigma of the bell; rational: the error at which
    /// acceptance drops to one half.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UfKindSection {
    Gaussian,
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub n_runs: u32,
    pub base_seed: u64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        MonteCarloSection {
            n_runs: 20,
            base_seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignificanceSection {
    pub confidence: f64,
}

impl Default for SignificanceSection {
    fn default() -> Self {
        SignificanceSection { confidence: 0.95 }
    }
}

fn field_error(field: String, reason: impl std::fmt::Display) -> CliError {
    CliError::data("config", format!("{field}: {reason}"))
}

fn build_user_function(uf: &UfSection, field: &str) -> Result<UserFunction, CliError> {
    let built = match uf.kind {
        UfKindSection::Gaussian => UserFunction::gaussian_exp(uf.scale),
        UfKindSection::Rational => UserFunction::rational_half(uf.scale),
    };
    built.map_err(|e| field_error(format!("{field}.scale"), e))
}

fn build_identity(values: [f64; 3], field: String) -> Result<DiscreteAcceptance, CliError> {
    DiscreteAcceptance::new(
        Allegiance::LABELS.iter().map(|s| s.to_string()).collect(),
        values.to_vec(),
    )
    .map_err(|e| field_error(field, e))
}

impl PipelineConfig {
    /// Builds the executable plan, checking every section: sensor and
    /// tracker parameters, user function scales, allegiance labels, id
    /// uniqueness, and that the scenario actually generates.
    pub fn to_plan(&self) -> Result<SimulationPlan, CliError> {
        let mut targets = Vec::with_capacity(self.scenario.targets.len());
        for (i, t) in self.scenario.targets.iter().enumerate() {
            let allegiance = Allegiance::from_label(&t.allegiance)
                .map_err(|e| field_error(format!("scenario.targets[{i}].allegiance"), e))?;
            targets.push(TargetConfig {
                target_id: t.target_id,
                start_x: t.start_x,
                start_y: t.start_y,
                allegiance,
                legs: t
                    .legs
                    .iter()
                    .map(|l| Leg {
                        speed: l.speed,
                        heading_deg: l.heading_deg,
                        duration: l.duration,
                    })
                    .collect(),
            });
        }
        let scenario = ScenarioConfig {
            dt: self.scenario.dt,
            targets,
        };
        generate_scenario(&scenario).map_err(|e| field_error("scenario".to_string(), e))?;

        if self.sensors.len() != 2 {
            return Err(field_error(
                "sensors".to_string(),
                format!("expected exactly 2 sensors, got {}", self.sensors.len()),
            ));
        }
        let mut sensors = Vec::with_capacity(2);
        for (i, s) in self.sensors.iter().enumerate() {
            let spec = SensorSpec {
                id: s.id,
                x: s.x,
                y: s.y,
                bearing_sigma_deg: s.bearing_sigma_deg,
                detection_prob: s.detection_prob,
                identity_concentration: s.identity_concentration,
            };
            spec.validate()
                .map_err(|e| field_error(format!("sensors[{i}]"), e))?;
            sensors.push(spec);
        }
        if sensors[0].id == sensors[1].id {
            return Err(field_error(
                "sensors".to_string(),
                "sensor ids must be distinct",
            ));
        }

        if self.trackers.is_empty() {
            return Err(field_error(
                "trackers".to_string(),
                "at least one tracker variant is required",
            ));
        }
        let mut trackers = Vec::with_capacity(self.trackers.len());
        for (i, t) in self.trackers.iter().enumerate() {
            let config = TrackerConfig {
                q: t.q,
                initial_velocity_sigma: t.initial_velocity_sigma,
            };
            config
                .validate()
                .map_err(|e| field_error(format!("trackers[{i}]"), e))?;
            trackers.push(TrackerVariant {
                tracker_id: t.tracker_id,
                config,
            });
        }

        if self.users.is_empty() {
            return Err(field_error(
                "users".to_string(),
                "at least one user is required",
            ));
        }
        let mut users = Vec::with_capacity(self.users.len());
        for (i, u) in self.users.iter().enumerate() {
            users.push(UserSpec {
                user_id: u.user_id,
                position: build_user_function(&u.position, &format!("users[{i}].position"))?,
                speed: build_user_function(&u.speed, &format!("users[{i}].speed"))?,
                heading: build_user_function(&u.heading, &format!("users[{i}].heading"))?,
                identity_enemy: build_identity(
                    u.identity_enemy,
                    format!("users[{i}].identity_enemy"),
                )?,
                identity_friend: build_identity(
                    u.identity_friend,
                    format!("users[{i}].identity_friend"),
                )?,
            });
        }

        Ok(SimulationPlan {
            scenario,
            sensors: [sensors[0], sensors[1]],
            trackers,
            users,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.monte_carlo.n_runs == 0 {
            return Err(field_error(
                "monte_carlo.n_runs".to_string(),
                "must be at least 1",
            ));
        }
        if !(0.0 < self.significance.confidence && self.significance.confidence < 1.0) {
            return Err(field_error(
                "significance.confidence".to_string(),
                format!(
                    "must lie strictly inside (0, 1), got {}",
                    self.significance.confidence
                ),
            ));
        }
        self.to_plan().map(drop)
    }
}

/// Loads and validates a configuration file. Missing sections take the
/// built-in defaults; an empty file yields the full default configuration.
pub fn load_config(path: &Path) -> Result<PipelineConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::data("config", format!("cannot read {}: {e}", path.display()))
    })?;
    let config: PipelineConfig = toml::from_str(&text)
        .map_err(|e| CliError::data("config", format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// Writes a configuration back out as TOML; `load_config` on the result
/// reproduces the value exactly.
pub fn save_config(path: &Path, config: &PipelineConfig) -> Result<(), CliError> {
    let text = toml::to_string_pretty(config).map_err(|e| {
        CliError::data("config", format!("cannot serialize configuration: {e}"))
    })?;
    fs::write(path, text)
        .map_err(|e| CliError::data("config", format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_the_full_default() {
        let parsed: PipelineConfig = toml::from_str("").unwrap();
        assert_eq!(parsed, PipelineConfig::default());
        assert!(parsed.validate().is_ok());
    }

    #[test]
    fn default_plan_matches_the_stock_plan() {
        let plan = PipelineConfig::default().to_plan().unwrap();
        let stock = moe_assess::default_plan().unwrap();
        assert_eq!(plan.scenario, stock.scenario);
        assert_eq!(plan.sensors, stock.sensors);
        assert_eq!(plan.trackers.len(), stock.trackers.len());
        for (a, b) in plan.trackers.iter().zip(&stock.trackers) {
            assert_eq!(a.tracker_id, b.tracker_id);
            assert_eq!(a.config, b.config);
        }
        assert_eq!(plan.users.len(), stock.users.len());
        for (a, b) in plan.users.iter().zip(&stock.users) {
            assert_eq!(a.user_id, b.user_id);
        }
    }

    #[test]
    fn partial_section_keeps_other_defaults() {
        let parsed: PipelineConfig = toml::from_str("[monte_carlo]\nn_runs = 5\n").unwrap();
        assert_eq!(parsed.monte_carlo.n_runs, 5);
        assert_eq!(parsed.monte_carlo.base_seed, 42);
        assert_eq!(parsed.scenario, ScenarioSection::default());
        assert_eq!(parsed.users.len(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r = toml::from_str::<PipelineConfig>("[monte_carlo]\nruns = 5\n");
        assert!(r.is_err());
        let r = toml::from_str::<PipelineConfig>("[bogus]\nx = 1\n");
        assert!(r.is_err());
    }

    #[test]
    fn negative_bearing_sigma_names_the_field() {
        let mut config = PipelineConfig::default();
        config.sensors[0].bearing_sigma_deg = -1.0;
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("sensors[0]"), "{err}");
        assert!(err.contains("bearing_sigma_deg"), "{err}");
    }

    #[test]
    fn bad_allegiance_label_names_the_field() {
        let mut config = PipelineConfig::default();
        config.scenario.targets[1].allegiance = "X".to_string();
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("scenario.targets[1].allegiance"), "{err}");
    }

    #[test]
    fn bad_user_scale_names_the_field() {
        let mut config = PipelineConfig::default();
        config.users[1].speed.scale = 0.0;
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("users[1].speed.scale"), "{err}");
    }

    #[test]
    fn zero_runs_rejected() {
        let mut config = PipelineConfig::default();
        config.monte_carlo.n_runs = 0;
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("monte_carlo.n_runs"), "{err}");
    }

    #[test]
    fn confidence_bounds_enforced() {
        let mut config = PipelineConfig::default();
        config.significance.confidence = 1.0;
        assert!(config.validate().is_err());
        config.significance.confidence = 0.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let mut config = PipelineConfig::default();
        config.monte_carlo.n_runs = 20;
        config.sensors[1].bearing_sigma_deg = 0.25;
        config.users[0].position.scale = 150.0;
        let text = toml::to_string_pretty(&config).unwrap();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn one_sensor_is_rejected() {
        let mut config = PipelineConfig::default();
        config.sensors.pop();
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("expected exactly 2 sensors"), "{err}");
    }
}
