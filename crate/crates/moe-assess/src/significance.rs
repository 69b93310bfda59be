//! Per-instant two-sample significance testing between two sets of Monte
//! Carlo runs.
//!
//! At each instant the difference of the two arms' mean values is compared
//! against a Student-t confidence limit built from the pooled sample
//! variances. "95% confidence" is read two-sided, i.e. the 0.975 quantile.
//! Variances use the divide-by-n convention, so the pooled term is written
//! directly as `n1 V1 + n2 V2`; the result is identical to the textbook
//! (n-1) form. The underlying values live on [0, 1], so normality is only
//! approximate; callers get the per-instant sample counts to judge how
//! much to trust each row.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::AssessError;
use crate::series::MoeRecord;

/// The outcome of testing one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRow {
    pub t: f64,
    /// Sample count in the first arm.
    pub n1: usize,
    /// Sample count in the second arm.
    pub n2: usize,
    /// Mean of arm one minus mean of arm two.
    pub delta_mean: f64,
    /// Confidence limit on the difference of means.
    pub delta_limit: f64,
    /// Whether |delta_mean| exceeds delta_limit.
    pub significant: bool,
}

/// All testable instants plus a count of the instants that were skipped
/// because either arm had fewer than two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub rows: Vec<SignificanceRow>,
    pub skipped_instants: usize,
    pub confidence: f64,
}

impl SignificanceReport {
    /// Fraction of testable instants flagged as significant.
    pub fn significant_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let hits = self.rows.iter().filter(|r| r.significant).count();
        hits as f64 / self.rows.len() as f64
    }
}

/// Two-sided Student-t quantile at the given confidence level, e.g.
/// confidence 0.95 gives the 0.975 point.
pub fn t_quantile_two_sided(confidence: f64, dof: usize) -> Result<f64, AssessError> {
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(AssessError::InvalidParameter {
            name: "confidence",
            reason: format!("must lie strictly inside (0, 1), got {confidence}"),
        });
    }
    if dof == 0 {
        return Err(AssessError::InvalidParameter {
            name: "dof",
            reason: "needs at least one degree of freedom".into(),
        });
    }
    let dist = StudentsT::new(0.0, 1.0, dof as f64).map_err(|e| {
        AssessError::InvalidParameter {
            name: "dof",
            reason: e.to_string(),
        }
    })?;
    Ok(dist.inverse_cdf(0.5 + confidence / 2.0))
}

/// Compares two arms of runs instant by instant.
///
/// Records are grouped by exact time value; all records of an arm at one
/// instant form that arm's sample (normally one per run). An instant is
/// testable only when both arms have at least two samples there; other
/// instants are counted in `skipped_instants`.
pub fn significance_test(
    arm1: &[MoeRecord],
    arm2: &[MoeRecord],
    confidence: f64,
) -> Result<SignificanceReport, AssessError> {
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(AssessError::InvalidParameter {
            name: "confidence",
            reason: format!("must lie strictly inside (0, 1), got {confidence}"),
        });
    }
    let mut by_t: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for rec in arm1 {
        by_t.entry(rec.t.to_bits()).or_default().0.push(rec.moe.value());
    }
    for rec in arm2 {
        by_t.entry(rec.t.to_bits()).or_default().1.push(rec.moe.value());
    }

    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for (bits, (v1, v2)) in by_t {
        let (n1, n2) = (v1.len(), v2.len());
        if n1 < 2 || n2 < 2 {
            skipped += 1;
            continue;
        }
        let t = f64::from_bits(bits);
        let m1 = mean(&v1);
        let m2 = mean(&v2);
        let var1 = biased_variance(&v1, m1);
        let var2 = biased_variance(&v2, m2);
        let dof = n1 + n2 - 2;
        let quantile = t_quantile_two_sided(confidence, dof)?;
        let pooled = (n1 as f64 * var1 + n2 as f64 * var2) / dof as f64;
        let delta_limit = quantile * ((1.0 / n1 as f64 + 1.0 / n2 as f64) * pooled).sqrt();
        let delta_mean = m1 - m2;
        rows.push(SignificanceRow {
            t,
            n1,
            n2,
            delta_mean,
            delta_limit,
            significant: delta_mean.abs() > delta_limit,
        });
    }
    Ok(SignificanceReport {
        rows,
        skipped_instants: skipped,
        confidence,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Divide-by-n sample variance.
fn biased_variance(values: &[f64], mean: f64) -> f64 {
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
}
