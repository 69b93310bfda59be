//! Command-line definition: global flags shared by every stage plus one
//! subcommand per pipeline stage.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "moe",
    version,
    about = "Measures-of-effectiveness pipeline over a passive sonar tracking test-bed"
)]
pub struct Cli {
    /// TOML configuration file; omitted sections fall back to the built-in
    /// defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Base random seed; overrides the configured one.
    #[arg(long, global = true, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Monte Carlo run count for `compare`; overrides the configured one.
    #[arg(long, global = true, value_name = "N")]
    pub runs: Option<u32>,

    /// Directory stage files are read from and written to.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Also write static SVG charts where a stage has something to plot.
    #[arg(long, global = true)]
    pub emit_svg: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate ground-truth target motion and write truth.csv.
    Scenario,
    /// Simulate both bearing sensors over truth.csv and triangulate the
    /// paired reports into plots.csv.
    Sense,
    /// Run every configured tracker variant over plots.csv, writing one
    /// tracks_<id>.csv per variant.
    Track,
    /// Score each tracker's tracks against truth.csv for all configured
    /// users and write the combined measure table moe.csv.
    Assess,
    /// Re-run the whole pipeline across Monte Carlo seeds and test the
    /// first two tracker variants for significant differences, writing
    /// significance.csv.
    Compare,
    /// Print closed-form worked examples with their expected values.
    Demo,
    /// Run the built-in oracle checks and report each on one line.
    Selftest,
}
