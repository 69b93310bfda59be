//! Line-oriented ASCII files carrying the pipeline products between
//! stages: ground truth, triangulated plots, filtered tracks, measure
//! records, and significance rows. One record per line, comma-separated,
//! with a '#'-prefixed header naming the columns. Reals are serialized
//! with 17 significant digits, so writing and reading back reproduces
//! every double-precision value exactly.

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix2, Matrix4, Vector4};

use moe_assess::{MoeRecord, SignificanceReport, Variable};
use moe_core::Moe;
use sonar_sim::{check_cov2, Allegiance, IdentityVector, Plot, Track, TrackState, TruthRecord};

const TRUTH_COLUMNS: usize = 7;
const PLOT_COLUMNS: usize = 10;
const TRACK_COLUMNS: usize = 20;

/// A read or write failure tied to a file and, where known, a line.
#[derive(Debug)]
pub struct StageFileError {
    pub path: String,
    pub line: Option<usize>,
    pub reason: String,
}

impl StageFileError {
    fn new(path: &Path, line: Option<usize>, reason: impl Into<String>) -> Self {
        StageFileError {
            path: path.display().to_string(),
            line,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for StageFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "{} line {}: {}", self.path, n, self.reason),
            None => write!(f, "{}: {}", self.path, self.reason),
        }
    }
}

impl std::error::Error for StageFileError {}

fn real(path: &Path, column: &'static str, v: f64) -> Result<String, StageFileError> {
    if !v.is_finite() {
        return Err(StageFileError::new(
            path,
            None,
            format!("non-finite value {v} for column {column}"),
        ));
    }
    Ok(format!("{v:.16e}"))
}

fn write_file(path: &Path, contents: &str) -> Result<(), StageFileError> {
    fs::write(path, contents).map_err(|e| StageFileError::new(path, None, format!("cannot write: {e}")))
}

fn read_rows(path: &Path, expected: usize) -> Result<Vec<(usize, Vec<String>)>, StageFileError> {
    let text = fs::read_to_string(path)
        .map_err(|e| StageFileError::new(path, None, format!("cannot read: {e}")))?;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != expected {
            return Err(StageFileError::new(
                path,
                Some(line_no),
                format!(
                    "expected {expected} comma-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        rows.push((line_no, fields));
    }
    Ok(rows)
}

fn parse_real(
    path: &Path,
    line: usize,
    name: &'static str,
    field: &str,
) -> Result<f64, StageFileError> {
    field.parse().map_err(|_| {
        StageFileError::new(
            path,
            Some(line),
            format!("cannot parse {name} `{field}` as a real"),
        )
    })
}

fn parse_u32(
    path: &Path,
    line: usize,
    name: &'static str,
    field: &str,
) -> Result<u32, StageFileError> {
    field.parse().map_err(|_| {
        StageFileError::new(
            path,
            Some(line),
            format!("cannot parse {name} `{field}` as an unsigned integer"),
        )
    })
}

fn parse_identity(
    path: &Path,
    line: usize,
    fields: &[String],
) -> Result<IdentityVector, StageFileError> {
    let p_e = parse_real(path, line, "pE", &fields[0])?;
    let p_n = parse_real(path, line, "pN", &fields[1])?;
    let p_f = parse_real(path, line, "pF", &fields[2])?;
    IdentityVector::new([p_e, p_n, p_f])
        .map_err(|e| StageFileError::new(path, Some(line), e.to_string()))
}

/// Writes ground-truth records, one per sample instant and target.
pub fn write_truth(path: &Path, records: &[TruthRecord]) -> Result<(), StageFileError> {
    let mut out = String::from("# t,target_id,x,y,speed,heading,allegiance\n");
    for r in records {
        let fields = [
            real(path, "t", r.t)?,
            r.target_id.to_string(),
            real(path, "x", r.x)?,
            real(path, "y", r.y)?,
            real(path, "speed", r.speed)?,
            real(path, "heading", r.heading_deg)?,
            r.allegiance.label().to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthRecord>, StageFileError> {
    let mut records = Vec::new();
    for (line, f) in read_rows(path, TRUTH_COLUMNS)? {
        let allegiance = Allegiance::from_label(&f[6])
            .map_err(|e| StageFileError::new(path, Some(line), format!("allegiance: {e}")))?;
        records.push(TruthRecord {
            t: parse_real(path, line, "t", &f[0])?,
            target_id: parse_u32(path, line, "target_id", &f[1])?,
            x: parse_real(path, line, "x", &f[2])?,
            y: parse_real(path, line, "y", &f[3])?,
            speed: parse_real(path, line, "speed", &f[4])?,
            heading_deg: parse_real(path, line, "heading", &f[5])?,
            allegiance,
        });
    }
    Ok(records)
}

/// Writes triangulated plots with the upper triangle of the 2x2 position
/// covariance and the fused identity vector.
pub fn write_plots(path: &Path, plots: &[Plot]) -> Result<(), StageFileError> {
    let mut out = String::from("# t,target_label,x,y,cxx,cxy,cyy,pE,pN,pF\n");
    for p in plots {
        let probs = p.identity.probs();
        let fields = [
            real(path, "t", p.t)?,
            p.target_label.to_string(),
            real(path, "x", p.x)?,
            real(path, "y", p.y)?,
            real(path, "cxx", p.cov[(0, 0)])?,
            real(path, "cxy", p.cov[(0, 1)])?,
            real(path, "cyy", p.cov[(1, 1)])?,
            real(path, "pE", probs[0])?,
            real(path, "pN", probs[1])?,
            real(path, "pF", probs[2])?,
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_plots(path: &Path) -> Result<Vec<Plot>, StageFileError> {
    let mut plots = Vec::new();
    for (line, f) in read_rows(path, PLOT_COLUMNS)? {
        let cxx = parse_real(path, line, "cxx", &f[4])?;
        let cxy = parse_real(path, line, "cxy", &f[5])?;
        let cyy = parse_real(path, line, "cyy", &f[6])?;
        let cov = Matrix2::new(cxx, cxy, cxy, cyy);
        check_cov2("plot covariance", &cov)
            .map_err(|e| StageFileError::new(path, Some(line), e.to_string()))?;
        plots.push(Plot {
            t: parse_real(path, line, "t", &f[0])?,
            target_label: parse_u32(path, line, "target_label", &f[1])?,
            x: parse_real(path, line, "x", &f[2])?,
            y: parse_real(path, line, "y", &f[3])?,
            cov,
            identity: parse_identity(path, line, &f[7..10])?,
        });
    }
    Ok(plots)
}

const TRACK_COV_INDEX: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

const TRACK_COV_NAMES: [&str; 10] = [
    "p11", "p12", "p13", "p14", "p22", "p23", "p24", "p33", "p34", "p44",
];

/// Writes filtered tracks, one state per line, with the upper triangle of
/// the 4x4 state covariance.
pub fn write_tracks(path: &Path, tracks: &[Track]) -> Result<(), StageFileError> {
    let mut out = String::from(
        "# t,track_id,target_label,x,y,vx,vy,p11,p12,p13,p14,p22,p23,p24,p33,p34,p44,pE,pN,pF\n",
    );
    for track in tracks {
        for s in &track.states {
            let probs = s.identity.probs();
            let mut fields = vec![
                real(path, "t", s.t)?,
                track.track_id.to_string(),
                track.target_label.to_string(),
                real(path, "x", s.state[0])?,
                real(path, "y", s.state[1])?,
                real(path, "vx", s.state[2])?,
                real(path, "vy", s.state[3])?,
            ];
            for (&(i, j), name) in TRACK_COV_INDEX.iter().zip(TRACK_COV_NAMES) {
                fields.push(real(path, name, s.cov[(i, j)])?);
            }
            fields.push(real(path, "pE", probs[0])?);
            fields.push(real(path, "pN", probs[1])?);
            fields.push(real(path, "pF", probs[2])?);
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    write_file(path, &out)
}

pub fn read_tracks(path: &Path) -> Result<Vec<Track>, StageFileError> {
    let mut tracks: Vec<Track> = Vec::new();
    for (line, f) in read_rows(path, TRACK_COLUMNS)? {
        let track_id = parse_u32(path, line, "track_id", &f[1])?;
        let target_label = parse_u32(path, line, "target_label", &f[2])?;
        let mut cov = Matrix4::zeros();
        for (k, (&(i, j), name)) in TRACK_COV_INDEX.iter().zip(TRACK_COV_NAMES).enumerate() {
            let v = parse_real(path, line, name, &f[7 + k])?;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
        for k in 0..4 {
            if cov[(k, k)] < 0.0 {
                return Err(StageFileError::new(
                    path,
                    Some(line),
                    "covariance diagonal must be nonnegative",
                ));
            }
        }
        let state = TrackState {
            t: parse_real(path, line, "t", &f[0])?,
            state: Vector4::new(
                parse_real(path, line, "x", &f[3])?,
                parse_real(path, line, "y", &f[4])?,
                parse_real(path, line, "vx", &f[5])?,
                parse_real(path, line, "vy", &f[6])?,
            ),
            cov,
            identity: parse_identity(path, line, &f[17..20])?,
        };
        match tracks
            .iter_mut()
            .find(|t| t.track_id == track_id && t.target_label == target_label)
        {
            Some(track) => track.states.push(state),
            None => tracks.push(Track {
                track_id,
                target_label,
                states: vec![state],
            }),
        }
    }
    Ok(tracks)
}

/// Writes measure records. Optional keys (target and user) are left empty
/// for rows that aggregate over them.
pub fn write_moe_records(path: &Path, records: &[MoeRecord]) -> Result<(), StageFileError> {
    let mut out = String::from("# run,tracker_id,t,target_id,user_id,variable,moe\n");
    for r in records {
        let fields = [
            r.run_index.to_string(),
            r.tracker_id.to_string(),
            real(path, "t", r.t)?,
            r.target_id.map(|v| v.to_string()).unwrap_or_default(),
            r.user_id.map(|v| v.to_string()).unwrap_or_default(),
            r.variable.label().to_string(),
            real(path, "moe", r.moe.value())?,
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

/// Reads measure records back; the provenance notes on the values are not
/// stored in the file, so read-back records carry a generic one.
pub fn read_moe_records(path: &Path) -> Result<Vec<MoeRecord>, StageFileError> {
    let mut records = Vec::new();
    for (line, f) in read_rows(path, 7)? {
        let parse_opt = |name: &'static str, field: &str| -> Result<Option<u32>, StageFileError> {
            if field.is_empty() {
                Ok(None)
            } else {
                parse_u32(path, line, name, field).map(Some)
            }
        };
        let variable = Variable::from_label(&f[5])
            .map_err(|e| StageFileError::new(path, Some(line), format!("variable: {e}")))?;
        let value = parse_real(path, line, "moe", &f[6])?;
        let moe = Moe::new(value, "measure file row")
            .map_err(|e| StageFileError::new(path, Some(line), e.to_string()))?;
        records.push(MoeRecord {
            run_index: parse_u32(path, line, "run", &f[0])?,
            tracker_id: parse_u32(path, line, "tracker_id", &f[1])?,
            t: parse_real(path, line, "t", &f[2])?,
            target_id: parse_opt("target_id", &f[3])?,
            user_id: parse_opt("user_id", &f[4])?,
            variable,
            moe,
        });
    }
    Ok(records)
}

/// Writes the per-instant significance rows along with the confidence and
/// skip count as comment lines.
pub fn write_significance(path: &Path, report: &SignificanceReport) -> Result<(), StageFileError> {
    let mut out = String::from("# t,n1,n2,delta_mean,delta_limit,significant\n");
    out.push_str(&format!("# confidence = {}\n", report.confidence));
    out.push_str(&format!(
        "# skipped_instants = {}\n",
        report.skipped_instants
    ));
    for r in &report.rows {
        let fields = [
            real(path, "t", r.t)?,
            r.n1.to_string(),
            r.n2.to_string(),
            real(path, "delta_mean", r.delta_mean)?,
            real(path, "delta_limit", r.delta_limit)?,
            if r.significant { "1" } else { "0" }.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}
