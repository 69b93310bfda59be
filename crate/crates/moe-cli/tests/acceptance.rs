//! End-to-end checks of the headline behaviours, one test per criterion,
//! each printing a single PASS line with the measured numbers.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use moe_assess::{
    aggregate, combine_users, default_plan, monte_carlo, significance_test, t_quantile_two_sided,
    AggregationScheme, CombineMode, MoeRecord, RunOutput, SimulationPlan, TrackerVariant,
    UserSpec,
};
use moe_core::{
    combine_geometric, combine_product, combine_user_functions, moe_discrete,
    moe_gaussian_closed, moe_integrate, moe_point, moe_uncertain_truth_gaussian,
    moe_window_gaussian, DiscreteAcceptance, DiscreteProbability, Moe, ObservationDistribution,
    PairedObservation, UserFunction,
};
use sonar_sim::angles::{compass_bearing_deg, wrap_deg_360};
use sonar_sim::{
    triangulate, Allegiance, IdentityVector, Leg, ScenarioConfig, SensorReport, SensorSpec,
    TargetConfig, TrackerConfig,
};

fn pass(criterion: u32, detail: &str) {
    println!("acceptance {criterion}: PASS ({detail})");
}

fn enf_labels() -> Vec<String> {
    Allegiance::LABELS.iter().map(|s| s.to_string()).collect()
}

#[test]
fn criterion_01_discrete_identity_measure_is_the_dot_product() {
    let acceptance = DiscreteAcceptance::new(enf_labels(), vec![1.0, 0.0, 0.0]).unwrap();
    let report = DiscreteProbability::new(enf_labels(), vec![0.60, 0.25, 0.15]).unwrap();
    let m = moe_discrete(&acceptance, &report).unwrap();
    assert_eq!(m.value(), 0.60);
    pass(1, &format!("discrete measure is exactly {}", m.value()));
}

#[test]
fn criterion_02_quadrature_matches_gaussian_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let sigma_o = rng.random_range(0.1..=10.0);
        let sigma_s = rng.random_range(0.1..=10.0);
        let closed = moe_gaussian_closed(sigma_o, sigma_s).unwrap().value();
        let uf = UserFunction::gaussian_exp(sigma_s).unwrap();
        let dist = ObservationDistribution::gaussian_1d(0.0, sigma_o).unwrap();
        let quad = moe_integrate(&uf, &dist, 1e-9).unwrap().value();
        worst = worst.max((closed - quad).abs());
        assert!(
            (closed - quad).abs() < 1e-6,
            "sigma_o {sigma_o}, sigma_s {sigma_s}: closed {closed}, quadrature {quad}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "200 integrations took {elapsed:?}, budget is 10 s"
    );
    pass(
        2,
        &format!(
            "200 parameter pairs, worst deviation {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_ninety_five_percent_window() {
    let mut worst: f64 = 0.0;
    for sigma_o in [0.3, 1.0, 7.0] {
        let m = moe_window_gaussian(1.959964 * sigma_o, sigma_o).unwrap().value();
        worst = worst.max((m - 0.95).abs());
        assert!(
            (m - 0.95).abs() < 1e-6,
            "sigma_o {sigma_o}: window measure {m}"
        );
    }
    pass(3, &format!("worst deviation from 0.95 is {worst:.2e}"));
}

#[test]
fn criterion_04_ten_equal_measures_product_and_geometric_mean() {
    let measures: Vec<Moe> = (0..10)
        .map(|_| Moe::new(0.80, "acceptance input").unwrap())
        .collect();
    let product = combine_product(&measures).unwrap().value();
    let geometric = combine_geometric(&measures).unwrap().value();
    assert!(
        (0.105..=0.110).contains(&product),
        "strict product {product} outside [0.105, 0.110]"
    );
    assert_eq!(geometric, 0.80, "geometric mean must be exact");
    pass(
        4,
        &format!("strict product {product:.6}, geometric mean exactly {geometric}"),
    );
}

fn constant_members(values: &[f64]) -> Vec<UserFunction> {
    values
        .iter()
        .map(|v| UserFunction::tabulated(vec![(0.0, *v)]).unwrap())
        .collect()
}

fn symmetric_value(values: &[f64], order: usize) -> f64 {
    let combined = combine_user_functions(constant_members(values), order, None).unwrap();
    moe_point(&combined, &[0.0]).unwrap().value()
}

#[test]
fn criterion_05_symmetric_combinations_identity_and_monotonicity() {
    for v in [0.0, 0.37, 0.8, 1.0] {
        for order in 1..=5 {
            let f = symmetric_value(&[v; 5], order);
            assert_eq!(f, v, "order {order} must pass the common value through");
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut violations = 0u32;
    for _ in 0..1000 {
        let values: Vec<f64> = (0..5).map(|_| rng.random_range(0.001..1.0)).collect();
        let mut previous = f64::INFINITY;
        for order in 1..=5 {
            let f = symmetric_value(&values, order);
            if f > previous + 1e-12 {
                violations += 1;
            }
            previous = f;
        }
    }
    assert_eq!(violations, 0, "order monotonicity must never be violated");
    pass(
        5,
        "all-equal identity holds for every order, 0 monotonicity violations in 1000 tuples",
    );
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let jitter = rng.random_range(0.3..1.0);
    (&a * a.transpose() + DMatrix::identity(n, n) * jitter) * scale
}

fn quad_form(inv: &[f64], y: &[f64], n: usize) -> f64 {
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += y[i] * inv[i * n + j] * y[j];
        }
    }
    q
}

#[test]
fn criterion_06_uncertain_reference_closed_form_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let samples = 1_000_000usize;
    let mut worst_sigmas: f64 = 0.0;
    for config in 0..50 {
        let n = 1 + config % 3;
        let scale_s = 10f64.powf(rng.random_range(-0.5..0.5));
        let scale_l = 10f64.powf(rng.random_range(-0.5..0.5));
        let c_s = random_spd(&mut rng, n, scale_s);
        let c_lambda = random_spd(&mut rng, n, scale_l);
        let spread = (c_s.trace() + c_lambda.trace()).sqrt();
        let d: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-1.0..1.0) * spread)
            .collect();
        let pair = PairedObservation::new(
            DVector::from_vec(d.clone()),
            DVector::from_element(n, 0.0),
        )
        .unwrap();
        let closed = moe_uncertain_truth_gaussian(&pair, &c_s, &c_lambda)
            .unwrap()
            .value();

        let inv_s: Vec<f64> = c_s.clone().try_inverse().unwrap().as_slice().to_vec();
        let chol_l: Vec<f64> = nalgebra::Cholesky::new(c_lambda.clone())
            .unwrap()
            .l()
            .as_slice()
            .to_vec();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut z = [0.0f64; 3];
        let mut y = [0.0f64; 3];
        for _ in 0..samples {
            for zi in z.iter_mut().take(n) {
                *zi = rng.sample(StandardNormal);
            }
            for i in 0..n {
                let mut lam = 0.0;
                for j in 0..=i {
                    lam += chol_l[j * n + i] * z[j];
                }
                y[i] = d[i] + lam;
            }
            let s = (-0.5 * quad_form(&inv_s, &y[..n], n)).exp();
            sum += s;
            sum_sq += s * s;
        }
        let mean = sum / samples as f64;
        let variance = (sum_sq / samples as f64 - mean * mean).max(0.0);
        let standard_error = (variance / samples as f64).sqrt();
        let sigmas = (closed - mean).abs() / standard_error.max(1e-15);
        worst_sigmas = worst_sigmas.max(sigmas);
        assert!(
            (closed - mean).abs() <= 3.0 * standard_error + 1e-12,
            "config {config} (dim {n}): closed {closed}, sampled {mean} +/- {standard_error}"
        );
    }

    let mut worst_limit: f64 = 0.0;
    for n in 1..=3 {
        let c_s = random_spd(&mut rng, n, 1.0);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pair = PairedObservation::new(
            DVector::from_vec(d.clone()),
            DVector::from_element(n, 0.0),
        )
        .unwrap();
        let tiny = DMatrix::identity(n, n) * 1e-12;
        let closed = moe_uncertain_truth_gaussian(&pair, &c_s, &tiny)
            .unwrap()
            .value();
        let dv = DVector::from_vec(d);
        let direct = (-0.5
            * dv.dot(
                &nalgebra::Cholesky::new(c_s)
                    .unwrap()
                    .solve(&dv),
            ))
        .exp();
        worst_limit = worst_limit.max((closed - direct).abs());
        assert!(
            (closed - direct).abs() < 1e-6,
            "dim {n}: vanishing reference noise must recover the certain case"
        );
    }
    pass(
        6,
        &format!(
            "50 sampled configs, worst deviation {worst_sigmas:.2} standard errors; certain limit within {worst_limit:.2e}"
        ),
    );
}

fn stock_sensors() -> [SensorSpec; 2] {
    [
        SensorSpec {
            id: 1,
            x: -10000.0,
            y: 0.0,
            bearing_sigma_deg: 1.0,
            detection_prob: 1.0,
            identity_concentration: 20.0,
        },
        SensorSpec {
            id: 2,
            x: 10000.0,
            y: 0.0,
            bearing_sigma_deg: 1.0,
            detection_prob: 1.0,
            identity_concentration: 20.0,
        },
    ]
}

fn bearing_report(sensor: &SensorSpec, x: f64, y: f64, noise_deg: f64) -> SensorReport {
    SensorReport {
        t: 0.0,
        sensor_id: sensor.id,
        target_label: 1,
        bearing_deg: wrap_deg_360(compass_bearing_deg(sensor.x, sensor.y, x, y) + noise_deg),
        identity: IdentityVector::certain(Allegiance::Friend),
    }
}

#[test]
fn criterion_07_triangulation_roundtrip_and_covariance() {
    let [s1, s2] = stock_sensors();
    let mut worst_err: f64 = 0.0;
    for x in [-8000.0, -4000.0, 0.0, 4000.0, 8000.0] {
        for y in [2000.0, 6000.0, 12000.0, 20000.0, 30000.0] {
            let plot = triangulate(
                &bearing_report(&s1, x, y, 0.0),
                &bearing_report(&s2, x, y, 0.0),
                &s1,
                &s2,
            )
            .unwrap()
            .expect("crossing geometry");
            let err = ((plot.x - x).powi(2) + (plot.y - y).powi(2)).sqrt();
            worst_err = worst_err.max(err);
            assert!(err < 1e-6, "({x}, {y}): position error {err} m");
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let draws = 100_000usize;
    let mut worst_rel: f64 = 0.0;
    for (x, y) in [(0.0, 8000.0), (4000.0, 16000.0), (-6000.0, 14000.0), (0.0, 25000.0)] {
        let reference = triangulate(
            &bearing_report(&s1, x, y, 0.0),
            &bearing_report(&s2, x, y, 0.0),
            &s1,
            &s2,
        )
        .unwrap()
        .expect("crossing geometry");
        let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..draws {
            let n1: f64 = rng.sample::<f64, _>(StandardNormal) * s1.bearing_sigma_deg;
            let n2: f64 = rng.sample::<f64, _>(StandardNormal) * s2.bearing_sigma_deg;
            let plot = triangulate(
                &bearing_report(&s1, x, y, n1),
                &bearing_report(&s2, x, y, n2),
                &s1,
                &s2,
            )
            .unwrap()
            .expect("crossing geometry");
            sx += plot.x;
            sy += plot.y;
            sxx += plot.x * plot.x;
            sxy += plot.x * plot.y;
            syy += plot.y * plot.y;
        }
        let k = draws as f64;
        let (mx, my) = (sx / k, sy / k);
        let cov = [sxx / k - mx * mx, sxy / k - mx * my, syy / k - my * my];
        let lin = [
            reference.cov[(0, 0)],
            reference.cov[(0, 1)],
            reference.cov[(1, 1)],
        ];
        let diff = ((lin[0] - cov[0]).powi(2)
            + 2.0 * (lin[1] - cov[1]).powi(2)
            + (lin[2] - cov[2]).powi(2))
        .sqrt();
        let norm = (cov[0].powi(2) + 2.0 * cov[1].powi(2) + cov[2].powi(2)).sqrt();
        let rel = diff / norm;
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 0.15,
            "({x}, {y}): covariance mismatch {rel:.3} relative Frobenius"
        );
    }
    pass(
        7,
        &format!(
            "25 noiseless round trips within {worst_err:.2e} m; worst covariance mismatch {worst_rel:.3} relative Frobenius"
        ),
    );
}

fn tolerant_user(user_id: u32, position: f64, speed: f64, heading: f64) -> UserSpec {
    UserSpec {
        user_id,
        position: UserFunction::gaussian_exp(position).unwrap(),
        speed: UserFunction::gaussian_exp(speed).unwrap(),
        heading: UserFunction::gaussian_exp(heading).unwrap(),
        identity_enemy: DiscreteAcceptance::new(enf_labels(), vec![0.6, 0.2, 0.2]).unwrap(),
        identity_friend: DiscreteAcceptance::new(enf_labels(), vec![0.2, 0.2, 0.6]).unwrap(),
    }
}

fn overall_rows(runs: &[RunOutput], tracker_id: u32) -> Vec<MoeRecord> {
    let mut rows = Vec::new();
    for run in runs {
        let base: Vec<MoeRecord> = run
            .records
            .iter()
            .filter(|r| r.tracker_id == tracker_id)
            .cloned()
            .collect();
        let combined = combine_users(&base, CombineMode::Arithmetic, None).unwrap();
        rows.extend(aggregate(&combined, AggregationScheme::SynthesisTargetsOfVariables).unwrap());
    }
    rows
}

#[test]
fn criterion_08_reference_quantile_and_null_calibration() {
    let quantile = t_quantile_two_sided(0.95, 38).unwrap();
    assert!(
        (quantile - 2.0244).abs() < 1e-3,
        "two-sided 95% quantile at 38 degrees of freedom: {quantile}"
    );

    let plan = SimulationPlan {
        scenario: ScenarioConfig {
            dt: 10.0,
            targets: vec![TargetConfig {
                target_id: 1,
                start_x: -6000.0,
                start_y: 12000.0,
                allegiance: Allegiance::Friend,
                legs: vec![Leg {
                    speed: 5.0,
                    heading_deg: 90.0,
                    duration: 5000.0,
                }],
            }],
        },
        sensors: stock_sensors(),
        trackers: vec![TrackerVariant {
            tracker_id: 1,
            config: TrackerConfig {
                q: 100.0,
                initial_velocity_sigma: 5.0,
            },
        }],
        users: vec![tolerant_user(1, 300.0, 40.0, 60.0)],
    };
    let arm1 = overall_rows(&monte_carlo(&plan, 20, 9001).unwrap(), 1);
    let arm2 = overall_rows(&monte_carlo(&plan, 20, 777000).unwrap(), 1);
    let report = significance_test(&arm1, &arm2, 0.95).unwrap();
    let fraction = report.significant_fraction();
    assert!(
        report.rows.len() >= 500,
        "need at least 500 testable instants, got {}",
        report.rows.len()
    );
    assert!(
        (0.02..=0.08).contains(&fraction),
        "null significant-instant rate {fraction:.4} outside 0.05 +/- 0.03"
    );
    pass(
        8,
        &format!(
            "quantile {quantile:.4}; null rate {fraction:.4} over {} instants",
            report.rows.len()
        ),
    );
}

#[test]
fn criterion_09_smoother_tracker_scores_higher() {
    let mut plan = default_plan().unwrap();
    assert_eq!(plan.trackers.len(), 2);
    let q1 = plan.trackers[0].config.q;
    let q2 = plan.trackers[1].config.q;
    assert!((q2 / q1 - 100.0).abs() < 1e-9, "plant noise ratio must be 100");
    plan.users = vec![
        tolerant_user(1, 200.0, 2.0, 20.0),
        tolerant_user(2, 150.0, 3.0, 30.0),
    ];
    let runs = monte_carlo(&plan, 20, 42).unwrap();
    let mean = |rows: &[MoeRecord]| {
        rows.iter().map(|r| r.moe.value()).sum::<f64>() / rows.len() as f64
    };
    let id1 = plan.trackers[0].tracker_id;
    let id2 = plan.trackers[1].tracker_id;
    let m1 = mean(&overall_rows(&runs, id1));
    let m2 = mean(&overall_rows(&runs, id2));
    assert!(
        m1 > m2,
        "20-run mean overall measure: smoother tracker {m1:.4}, noisier tracker {m2:.4}"
    );
    pass(
        9,
        &format!("mean overall measure {m1:.4} (q = {q1}) vs {m2:.4} (q = {q2})"),
    );
}

fn run_stage(dir: &Path, args: &[&str]) {
    let output = Command::new(env!("CARGO_BIN_EXE_moe"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("pipeline binary runs");
    assert!(
        output.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn criterion_10_identical_invocations_are_byte_identical() {
    let base = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-repro");
    let dirs = [base.join("first"), base.join("second")];
    for dir in &dirs {
        if dir.exists() {
            fs::remove_dir_all(dir).unwrap();
        }
        fs::create_dir_all(dir).unwrap();
        for stage in ["scenario", "sense", "track", "assess"] {
            run_stage(dir, &[stage, "--seed", "4242"]);
        }
        run_stage(dir, &["compare", "--seed", "4242", "--runs", "4"]);
    }
    let first = dir_contents(&dirs[0]);
    let second = dir_contents(&dirs[1]);
    for name in [
        "truth.csv",
        "plots.csv",
        "tracks_1.csv",
        "tracks_2.csv",
        "moe.csv",
        "significance.csv",
    ] {
        assert!(first.contains_key(name), "missing stage product {name}");
    }
    assert_eq!(
        first.keys().collect::<Vec<_>>(),
        second.keys().collect::<Vec<_>>()
    );
    let mut bytes = 0usize;
    for (name, content) in &first {
        assert_eq!(content, &second[name], "{name} differs between invocations");
        bytes += content.len();
    }
    pass(
        10,
        &format!("{} files, {bytes} bytes, byte-identical across invocations", first.len()),
    );
}
