//! The stage implementations behind the subcommands. Every stage consumes
//! files from the output directory and writes its products back there, so
//! any stage can be re-run on its own; the only in-process state is the
//! loaded configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use moe_assess::{
    aggregate, combine_users, compute_moe_series, monte_carlo, sensor_seeds, significance_test,
    t_quantile_two_sided, AggregationScheme, CombineMode, MoeRecord, RunOutput,
};
use moe_core::{
    combine_geometric, combine_product, moe_discrete, moe_gaussian_closed, moe_integrate,
    moe_window_gaussian, DiscreteAcceptance, DiscreteProbability, Moe, ObservationDistribution,
    UserFunction,
};
use sonar_sim::angles::compass_bearing_deg;
use sonar_sim::{
    generate_scenario, pair_and_triangulate, run_tracker, simulate_sensor, Allegiance,
    IdentityVector, Plot, SensorReport, Track,
};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::stage_files::{
    read_plots, read_truth, write_moe_records, write_plots, write_significance, write_tracks,
    write_truth, StageFileError,
};
use crate::svg::{line_chart, Series};

pub const TRUTH_FILE: &str = "truth.csv";
pub const PLOTS_FILE: &str = "plots.csv";
pub const MOE_FILE: &str = "moe.csv";
pub const SIGNIFICANCE_FILE: &str = "significance.csv";

pub fn tracks_file(tracker_id: u32) -> String {
    format!("tracks_{tracker_id}.csv")
}

/// Flag-derived settings shared by the stages.
pub struct StageOptions {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub runs: u32,
    pub emit_svg: bool,
}

fn stage_err(stage: &'static str) -> impl Fn(StageFileError) -> CliError {
    move |e| CliError::data(stage, e.to_string())
}

fn ensure_out_dir(stage: &'static str, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::data(
            stage,
            format!("cannot create output directory {}: {e}", dir.display()),
        )
    })
}

/// Generates ground truth from the configured scenario.
pub fn scenario(config: &PipelineConfig, opts: &StageOptions) -> Result<(), CliError> {
    let plan = config.to_plan()?;
    ensure_out_dir("scenario", &opts.out_dir)?;
    let truth = generate_scenario(&plan.scenario)
        .map_err(|e| CliError::data("scenario", e.to_string()))?;
    let path = opts.out_dir.join(TRUTH_FILE);
    write_truth(&path, &truth).map_err(stage_err("scenario"))?;
    println!(
        "scenario: wrote {} truth records to {}",
        truth.len(),
        path.display()
    );
    Ok(())
}

/// Simulates both bearing sensors over the truth file and triangulates
/// matched reports into plots.
pub fn sense(config: &PipelineConfig, opts: &StageOptions) -> Result<(), CliError> {
    let plan = config.to_plan()?;
    ensure_out_dir("sense", &opts.out_dir)?;
    let truth = read_truth(&opts.out_dir.join(TRUTH_FILE)).map_err(stage_err("sense"))?;
    let [seed1, seed2] = sensor_seeds(opts.seed);
    let reports1 = simulate_sensor(&truth, &plan.sensors[0], seed1)
        .map_err(|e| CliError::data("sense", e.to_string()))?;
    let reports2 = simulate_sensor(&truth, &plan.sensors[1], seed2)
        .map_err(|e| CliError::data("sense", e.to_string()))?;
    let plots = pair_and_triangulate(&reports1, &reports2, &plan.sensors[0], &plan.sensors[1])
        .map_err(|e| CliError::data("sense", e.to_string()))?;
    let path = opts.out_dir.join(PLOTS_FILE);
    write_plots(&path, &plots).map_err(stage_err("sense"))?;
    println!(
        "sense: {} and {} sensor reports, {} triangulated plots to {}",
        reports1.len(),
        reports2.len(),
        plots.len(),
        path.display()
    );
    Ok(())
}

fn tracks_from_plots(
    plots: &[Plot],
    config: &sonar_sim::TrackerConfig,
) -> Result<Vec<Track>, CliError> {
    let mut labels: Vec<u32> = plots.iter().map(|p| p.target_label).collect();
    labels.sort_unstable();
    labels.dedup();
    let mut tracks = Vec::with_capacity(labels.len());
    for label in labels {
        let own: Vec<Plot> = plots
            .iter()
            .filter(|p| p.target_label == label)
            .cloned()
            .collect();
        tracks.push(
            run_tracker(&own, label, config).map_err(|e| CliError::data("track", e.to_string()))?,
        );
    }
    Ok(tracks)
}

/// Runs every configured tracker variant over the plots file.
pub fn track(config: &PipelineConfig, opts: &StageOptions) -> Result<(), CliError> {
    let plan = config.to_plan()?;
    ensure_out_dir("track", &opts.out_dir)?;
    let plots = read_plots(&opts.out_dir.join(PLOTS_FILE)).map_err(stage_err("track"))?;
    for variant in &plan.trackers {
        let tracks = tracks_from_plots(&plots, &variant.config)?;
        let states: usize = tracks.iter().map(|t| t.states.len()).sum();
        let path = opts.out_dir.join(tracks_file(variant.tracker_id));
        write_tracks(&path, &tracks).map_err(stage_err("track"))?;
        println!(
            "track: tracker {}: {} states across {} tracks to {}",
            variant.tracker_id,
            states,
            tracks.len(),
            path.display()
        );
    }
    Ok(())
}

/// Per-user measures plus the user-combined, per-target, and overall
/// reductions for one tracker's records.
fn enriched_records(base: &[MoeRecord]) -> Result<Vec<MoeRecord>, CliError> {
    let combined = combine_users(base, CombineMode::Arithmetic, None)
        .map_err(|e| CliError::data("assess", e.to_string()))?;
    let per_target = aggregate(&combined, AggregationScheme::OverVariablesGeometric)
        .map_err(|e| CliError::data("assess", e.to_string()))?;
    let overall = aggregate(&combined, AggregationScheme::SynthesisTargetsOfVariables)
        .map_err(|e| CliError::data("assess", e.to_string()))?;
    let mut out = Vec::with_capacity(base.len() + combined.len() + per_target.len() + overall.len());
    out.extend_from_slice(base);
    out.extend(combined);
    out.extend(per_target);
    out.extend(overall);
    Ok(out)
}

fn series_from_records<'a>(
    records: impl Iterator<Item = &'a MoeRecord>,
    name: String,
) -> Series {
    let mut points: Vec<(f64, f64)> = records.map(|r| (r.t, r.moe.value())).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Series { name, points }
}

/// Scores every tracker's tracks file against the truth file for all
/// configured users and writes the combined measure table.
pub fn assess(config: &PipelineConfig, opts: &StageOptions) -> Result<(), CliError> {
    let plan = config.to_plan()?;
    ensure_out_dir("assess", &opts.out_dir)?;
    let truth = read_truth(&opts.out_dir.join(TRUTH_FILE)).map_err(stage_err("assess"))?;
    let mut all_records = Vec::new();
    for variant in &plan.trackers {
        let path = opts.out_dir.join(tracks_file(variant.tracker_id));
        let tracks = crate::stage_files::read_tracks(&path).map_err(stage_err("assess"))?;
        let base = compute_moe_series(&tracks, &truth, &plan.users, variant.tracker_id, 0)
            .map_err(|e| CliError::data("assess", e.to_string()))?;
        let enriched = enriched_records(&base)?;
        if opts.emit_svg {
            let mut series = vec![series_from_records(
                enriched
                    .iter()
                    .filter(|r| r.user_id.is_none() && r.target_id.is_none()),
                "overall".to_string(),
            )];
            let mut targets: Vec<u32> = enriched.iter().filter_map(|r| r.target_id).collect();
            targets.sort_unstable();
            targets.dedup();
            for target in targets {
                series.push(series_from_records(
                    enriched.iter().filter(|r| {
                        r.user_id.is_none()
                            && r.target_id == Some(target)
                            && r.variable == moe_assess::Variable::Combined
                    }),
                    format!("target {target}"),
                ));
            }
            let chart = line_chart(
                &format!("effectiveness, tracker {}", variant.tracker_id),
                "time, s",
                "measure of effectiveness",
                Some((0.0, 1.0)),
                &series,
            );
            let svg_path = opts
                .out_dir
                .join(format!("moe_tracker_{}.svg", variant.tracker_id));
            fs::write(&svg_path, chart)
                .map_err(|e| CliError::data("assess", format!("cannot write chart: {e}")))?;
        }
        all_records.extend(enriched);
    }
    let path = opts.out_dir.join(MOE_FILE);
    write_moe_records(&path, &all_records).map_err(stage_err("assess"))?;
    println!(
        "assess: wrote {} measure records to {}",
        all_records.len(),
        path.display()
    );
    Ok(())
}

/// Overall per-run effectiveness rows for one tracker across Monte Carlo
/// runs: users combined arithmetically, then variables reduced
/// geometrically within each target and averaged over targets.
fn overall_rows(runs: &[RunOutput], tracker_id: u32) -> Result<Vec<MoeRecord>, CliError> {
    let mut rows = Vec::new();
    for run in runs {
        let base: Vec<MoeRecord> = run
            .records
            .iter()
            .filter(|r| r.tracker_id == tracker_id)
            .cloned()
            .collect();
        let combined = combine_users(&base, CombineMode::Arithmetic, None)
            .map_err(|e| CliError::data("compare", e.to_string()))?;
        let overall = aggregate(&combined, AggregationScheme::SynthesisTargetsOfVariables)
            .map_err(|e| CliError::data("compare", e.to_string()))?;
        rows.extend(overall);
    }
    Ok(rows)
}

fn mean_series(rows: &[MoeRecord], name: String) -> Series {
    let mut by_t: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = by_t.entry(r.t.to_bits()).or_insert((0.0, 0));
        e.0 += r.moe.value();
        e.1 += 1;
    }
    Series {
        name,
        points: by_t
            .into_iter()
            .map(|(bits, (sum, n))| (f64::from_bits(bits), sum / n as f64))
            .collect(),
    }
}

/// Monte Carlo comparison of the first two configured tracker variants:
/// runs the full pipeline for every seed in process, then tests the
/// per-instant difference of the overall measures for significance.
pub fn compare(config: &PipelineConfig, opts: &StageOptions) -> Result<(), CliError> {
    let plan = config.to_plan()?;
    if plan.trackers.len() < 2 {
        return Err(CliError::data(
            "compare",
            format!(
                "needs at least two tracker variants, configuration has {}",
                plan.trackers.len()
            ),
        ));
    }
    ensure_out_dir("compare", &opts.out_dir)?;
    let id1 = plan.trackers[0].tracker_id;
    let id2 = plan.trackers[1].tracker_id;
    let runs = monte_carlo(&plan, opts.runs, opts.seed)
        .map_err(|e| CliError::data("compare", e.to_string()))?;
    let arm1 = overall_rows(&runs, id1)?;
    let arm2 = overall_rows(&runs, id2)?;
    let report = significance_test(&arm1, &arm2, config.significance.confidence)
        .map_err(|e| CliError::data("compare", e.to_string()))?;
    let path = opts.out_dir.join(SIGNIFICANCE_FILE);
    write_significance(&path, &report).map_err(stage_err("compare"))?;
    if opts.emit_svg {
        let chart = line_chart(
            &format!("mean overall effectiveness, trackers {id1} and {id2}"),
            "time, s",
            "measure of effectiveness",
            Some((0.0, 1.0)),
            &[
                mean_series(&arm1, format!("tracker {id1}")),
                mean_series(&arm2, format!("tracker {id2}")),
            ],
        );
        fs::write(opts.out_dir.join("compare_mean_moe.svg"), chart)
            .map_err(|e| CliError::data("compare", format!("cannot write chart: {e}")))?;
    }
    let significant = report.rows.iter().filter(|r| r.significant).count();
    println!(
        "compare: trackers {} vs {} over {} runs: {} testable instants, {} significant ({:.1}%), {} skipped, to {}",
        id1,
        id2,
        opts.runs,
        report.rows.len(),
        significant,
        100.0 * report.significant_fraction(),
        report.skipped_instants,
        path.display()
    );
    Ok(())
}

fn enf_labels() -> Vec<String> {
    Allegiance::LABELS.iter().map(|s| s.to_string()).collect()
}

/// Prints the closed-form worked examples with their expected values.
pub fn demo() -> Result<(), CliError> {
    let fail = |e: moe_core::MoeError| CliError::data("demo", e.to_string());

    let acceptance =
        DiscreteAcceptance::new(enf_labels(), vec![1.0, 0.0, 0.0]).map_err(fail)?;
    let report =
        DiscreteProbability::new(enf_labels(), vec![0.60, 0.25, 0.15]).map_err(fail)?;
    let discrete = moe_discrete(&acceptance, &report).map_err(fail)?;
    println!(
        "identity acceptance (1, 0, 0) against declared probabilities (0.60, 0.25, 0.15): M={:.2} (expected 0.60)",
        discrete.value()
    );

    let closed = moe_gaussian_closed(1.0, 1.0).map_err(fail)?;
    println!(
        "gaussian requirement sigma_s = 1 against gaussian error sigma_o = 1: M={:.4} (expected 1/sqrt(2) = 0.7071)",
        closed.value()
    );

    let window = moe_window_gaussian(1.959964, 1.0).map_err(fail)?;
    println!(
        "acceptance window of +/-1.959964 sigma_o: M={:.4} (expected 0.95)",
        window.value()
    );

    let eight: Vec<Moe> = (0..10)
        .map(|_| Moe::new(0.80, "demo input"))
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    let product = combine_product(&eight).map_err(fail)?;
    let geometric = combine_geometric(&eight).map_err(fail)?;
    println!(
        "ten aspect measures of 0.80: product M={:.4} (about 0.11), geometric mean M={:.2} (expected 0.80)",
        product.value(),
        geometric.value()
    );
    Ok(())
}

fn check(name: &str, body: impl FnOnce() -> Result<(), String>) -> Result<(), CliError> {
    match body() {
        Ok(()) => {
            println!("selftest: {name}: ok");
            Ok(())
        }
        Err(reason) => Err(CliError::data("selftest", format!("{name}: {reason}"))),
    }
}

/// Runs the built-in oracle checks: closed forms against quadrature, the
/// confidence-window identity, the combination rules, the reference
/// t-quantile, triangulation, and sensor determinism.
pub fn selftest() -> Result<(), CliError> {
    check("discrete worked example", || {
        let acceptance = DiscreteAcceptance::new(enf_labels(), vec![1.0, 0.0, 0.0])
            .map_err(|e| e.to_string())?;
        let report = DiscreteProbability::new(enf_labels(), vec![0.60, 0.25, 0.15])
            .map_err(|e| e.to_string())?;
        let m = moe_discrete(&acceptance, &report).map_err(|e| e.to_string())?;
        if m.value() == 0.60 {
            Ok(())
        } else {
            Err(format!("got {}, expected exactly 0.60", m.value()))
        }
    })?;

    check("closed form matches quadrature", || {
        let mut worst: f64 = 0.0;
        for (sigma_o, sigma_s) in [(1.0, 1.0), (0.3, 2.0), (5.0, 0.7)] {
            let closed = moe_gaussian_closed(sigma_o, sigma_s)
                .map_err(|e| e.to_string())?
                .value();
            let uf = UserFunction::gaussian_exp(sigma_s).map_err(|e| e.to_string())?;
            let dist =
                ObservationDistribution::gaussian_1d(0.0, sigma_o).map_err(|e| e.to_string())?;
            let quad = moe_integrate(&uf, &dist, 1e-9)
                .map_err(|e| e.to_string())?
                .value();
            worst = worst.max((closed - quad).abs());
        }
        if worst < 1e-6 {
            Ok(())
        } else {
            Err(format!("worst deviation {worst:.3e} exceeds 1e-6"))
        }
    })?;

    check("confidence window", || {
        let m = moe_window_gaussian(1.959964, 1.0)
            .map_err(|e| e.to_string())?
            .value();
        if (m - 0.95).abs() < 1e-6 {
            Ok(())
        } else {
            Err(format!("got {m}, expected 0.95 within 1e-6"))
        }
    })?;

    check("strict and geometric combination", || {
        let measures: Vec<Moe> = (0..10)
            .map(|_| Moe::new(0.80, "selftest input"))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let product = combine_product(&measures).map_err(|e| e.to_string())?.value();
        let geometric = combine_geometric(&measures)
            .map_err(|e| e.to_string())?
            .value();
        if !(0.105..=0.110).contains(&product) {
            Err(format!("product {product} outside [0.105, 0.110]"))
        } else if geometric != 0.80 {
            Err(format!("geometric mean {geometric} is not exactly 0.80"))
        } else {
            Ok(())
        }
    })?;

    check("reference t-quantile", || {
        let q = t_quantile_two_sided(0.95, 38).map_err(|e| e.to_string())?;
        if (q - 2.0244).abs() < 1e-3 {
            Ok(())
        } else {
            Err(format!("got {q}, expected 2.0244 within 1e-3"))
        }
    })?;

    check("noiseless triangulation round trip", || {
        let plan = PipelineConfig::default()
            .to_plan()
            .map_err(|e| e.to_string())?;
        let (x, y) = (1500.0, 12000.0);
        let reports: Vec<SensorReport> = plan
            .sensors
            .iter()
            .map(|s| SensorReport {
                t: 0.0,
                sensor_id: s.id,
                target_label: 1,
                bearing_deg: compass_bearing_deg(s.x, s.y, x, y),
                identity: IdentityVector::certain(Allegiance::Friend),
            })
            .collect();
        let plot = sonar_sim::triangulate(
            &reports[0],
            &reports[1],
            &plan.sensors[0],
            &plan.sensors[1],
        )
        .map_err(|e| e.to_string())?
        .ok_or("crossing geometry was rejected")?;
        let err = ((plot.x - x).powi(2) + (plot.y - y).powi(2)).sqrt();
        if err < 1e-6 {
            Ok(())
        } else {
            Err(format!("position error {err:.3e} m exceeds 1e-6"))
        }
    })?;

    check("sensor determinism", || {
        let plan = PipelineConfig::default()
            .to_plan()
            .map_err(|e| e.to_string())?;
        let truth = generate_scenario(&plan.scenario).map_err(|e| e.to_string())?;
        let a = simulate_sensor(&truth, &plan.sensors[0], 7).map_err(|e| e.to_string())?;
        let b = simulate_sensor(&truth, &plan.sensors[0], 7).map_err(|e| e.to_string())?;
        if a == b {
            Ok(())
        } else {
            Err("identical seeds produced different reports".to_string())
        }
    })?;

    println!("selftest: all checks passed");
    Ok(())
}
