//! The Monte Carlo harness: repeated full-pipeline runs with derived
//! seeds, producing effectiveness records ready for aggregation and
//! significance testing.

use sonar_sim::{
    generate_scenario, pair_and_triangulate, run_tracker, simulate_sensor, Plot, ScenarioConfig,
    SensorReport, SensorSpec, Track, TrackerConfig, TruthRecord,
};

use crate::error::AssessError;
use crate::series::{compute_moe_series, MoeRecord};
use crate::users::UserSpec;

/// One tracker variant under assessment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerVariant {
    pub tracker_id: u32,
    pub config: TrackerConfig,
}

/// Everything needed to run the pipeline end to end.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub scenario: ScenarioConfig,
    pub sensors: [SensorSpec; 2],
    pub trackers: Vec<TrackerVariant>,
    pub users: Vec<UserSpec>,
}

/// The products of one pipeline run, kept stage by stage so callers can
/// write any intermediate to disk or feed it onward.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub run_index: u32,
    pub seed: u64,
    pub truth: Vec<TruthRecord>,
    pub reports: [Vec<SensorReport>; 2],
    pub plots: Vec<Plot>,
    /// Tracks per tracker variant, in plan order.
    pub tracks: Vec<(u32, Vec<Track>)>,
    pub records: Vec<MoeRecord>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn validate_plan(plan: &SimulationPlan) -> Result<(), AssessError> {
    if plan.trackers.is_empty() {
        return Err(AssessError::EmptyInput { what: "trackers" });
    }
    if plan.users.is_empty() {
        return Err(AssessError::EmptyInput { what: "users" });
    }
    let mut tracker_ids: Vec<u32> = plan.trackers.iter().map(|t| t.tracker_id).collect();
    tracker_ids.sort_unstable();
    tracker_ids.dedup();
    if tracker_ids.len() != plan.trackers.len() {
        return Err(AssessError::InvalidParameter {
            name: "trackers",
            reason: "tracker ids must be distinct".into(),
        });
    }
    let mut user_ids: Vec<u32> = plan.users.iter().map(|u| u.user_id).collect();
    user_ids.sort_unstable();
    user_ids.dedup();
    if user_ids.len() != plan.users.len() {
        return Err(AssessError::InvalidParameter {
            name: "users",
            reason: "user ids must be distinct".into(),
        });
    }
    if plan.sensors[0].id == plan.sensors[1].id {
        return Err(AssessError::InvalidParameter {
            name: "sensors",
            reason: "sensor ids must be distinct".into(),
        });
    }
    Ok(())
}

/// The two per-sensor noise-stream seeds derived from one run seed, the
/// same derivation [`run_pipeline`] uses. Exposed so a stage that only
/// simulates sensors can reproduce a pipeline run exactly.
pub fn sensor_seeds(seed: u64) -> [u64; 2] {
    let mut stream = seed;
    let first = splitmix64(&mut stream);
    let second = splitmix64(&mut stream);
    [first, second]
}

/// Runs truth generation, both sensors, triangulation, every tracker
/// variant, and the per-user effectiveness series, all from one seed.
/// Each sensor gets its own stream seed derived from `seed`, so the two
/// noise sequences are independent but jointly reproducible.
pub fn run_pipeline(
    plan: &SimulationPlan,
    seed: u64,
    run_index: u32,
) -> Result<RunOutput, AssessError> {
    validate_plan(plan)?;
    let truth = generate_scenario(&plan.scenario)?;

    let [seed1, seed2] = sensor_seeds(seed);
    let reports1 = simulate_sensor(&truth, &plan.sensors[0], seed1)?;
    let reports2 = simulate_sensor(&truth, &plan.sensors[1], seed2)?;
    let plots = pair_and_triangulate(&reports1, &reports2, &plan.sensors[0], &plan.sensors[1])?;

    let mut labels: Vec<u32> = plots.iter().map(|p| p.target_label).collect();
    labels.sort_unstable();
    labels.dedup();

    let mut tracks = Vec::with_capacity(plan.trackers.len());
    let mut records = Vec::new();
    for variant in &plan.trackers {
        let mut variant_tracks = Vec::with_capacity(labels.len());
        for label in &labels {
            let own: Vec<Plot> = plots
                .iter()
                .filter(|p| p.target_label == *label)
                .cloned()
                .collect();
            variant_tracks.push(run_tracker(&own, *label, &variant.config)?);
        }
        records.extend(compute_moe_series(
            &variant_tracks,
            &truth,
            &plan.users,
            variant.tracker_id,
            run_index,
        )?);
        tracks.push((variant.tracker_id, variant_tracks));
    }

    Ok(RunOutput {
        run_index,
        seed,
        truth,
        reports: [reports1, reports2],
        plots,
        tracks,
        records,
    })
}

/// Runs the pipeline `n_runs` times with seeds `base_seed + run_index`.
/// Failures carry the run index so the offending seed can be replayed.
pub fn monte_carlo(
    plan: &SimulationPlan,
    n_runs: u32,
    base_seed: u64,
) -> Result<Vec<RunOutput>, AssessError> {
    if n_runs == 0 {
        return Err(AssessError::InvalidParameter {
            name: "n_runs",
            reason: "needs at least one run".into(),
        });
    }
    let mut runs = Vec::with_capacity(n_runs as usize);
    for run_index in 0..n_runs {
        let seed = base_seed.wrapping_add(run_index as u64);
        let output =
            run_pipeline(plan, seed, run_index).map_err(|e| AssessError::RunFailed {
                run_index,
                reason: e.to_string(),
            })?;
        runs.push(output);
    }
    Ok(runs)
}

/// The stock plan: default scenario and sensors, a smooth and a
/// responsive tracker variant, and the stock user pair.
pub fn default_plan() -> Result<SimulationPlan, AssessError> {
    Ok(SimulationPlan {
        scenario: sonar_sim::default_scenario(),
        sensors: sonar_sim::default_sensors(),
        trackers: vec![
            TrackerVariant {
                tracker_id: 1,
                config: TrackerConfig {
                    q: 1e-3,
                    initial_velocity_sigma: 5.0,
                },
            },
            TrackerVariant {
                tracker_id: 2,
                config: TrackerConfig {
                    q: 1e-1,
                    initial_velocity_sigma: 5.0,
                },
            },
        ],
        users: crate::users::default_users()?,
    })
}
