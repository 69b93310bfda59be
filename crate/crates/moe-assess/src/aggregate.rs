//! Aggregation of effectiveness records over targets and variables.
//!
//! Three schemes are provided: an arithmetic mean over targets (one output
//! per variable), a geometric mean over variables (one output per target),
//! and the two composed in that order: geometric over variables within
//! each target first, then arithmetic across targets. Composing in the
//! reversed order is a different function and is deliberately not offered
//! under this name.

use std::collections::BTreeMap;

use moe_core::{combine_geometric, Moe};

use crate::error::AssessError;
use crate::series::{MoeRecord, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationScheme {
    /// Arithmetic mean across targets, separately per variable.
    OverTargetsArithmetic,
    /// Geometric mean across variables, separately per target.
    OverVariablesGeometric,
    /// Geometric mean over variables within each target, then arithmetic
    /// mean of those across targets.
    SynthesisTargetsOfVariables,
}

/// Key identifying one aggregation group; ordered so output is stable.
type GroupKey = (u32, u32, Option<u32>, u64);

fn group_key(rec: &MoeRecord) -> GroupKey {
    (rec.run_index, rec.tracker_id, rec.user_id, rec.t.to_bits())
}

/// Aggregates records according to `scheme`. Grouping is always within
/// one (run, tracker, user, instant); instants with no members produce no
/// output. The two variable-combining schemes reject records that are
/// already combined, so aggregates cannot be silently aggregated twice.
pub fn aggregate(
    records: &[MoeRecord],
    scheme: AggregationScheme,
) -> Result<Vec<MoeRecord>, AssessError> {
    match scheme {
        AggregationScheme::OverTargetsArithmetic => over_targets(records),
        AggregationScheme::OverVariablesGeometric => over_variables(records),
        AggregationScheme::SynthesisTargetsOfVariables => {
            let per_target = over_variables(records)?;
            over_targets(&per_target)
        }
    }
}

fn over_targets(records: &[MoeRecord]) -> Result<Vec<MoeRecord>, AssessError> {
    let mut groups: BTreeMap<(GroupKey, usize), Vec<&MoeRecord>> = BTreeMap::new();
    for rec in records {
        groups
            .entry((group_key(rec), rec.variable.order_key()))
            .or_default()
            .push(rec);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((_, _), members) in groups {
        let mean =
            members.iter().map(|r| r.moe.value()).sum::<f64>() / members.len() as f64;
        let sample = members[0];
        out.push(MoeRecord {
            t: sample.t,
            tracker_id: sample.tracker_id,
            target_id: None,
            user_id: sample.user_id,
            variable: sample.variable,
            moe: Moe::new(mean, "aggregate: arithmetic mean over targets")?,
            run_index: sample.run_index,
        });
    }
    Ok(out)
}

fn over_variables(records: &[MoeRecord]) -> Result<Vec<MoeRecord>, AssessError> {
    let mut groups: BTreeMap<(GroupKey, Option<u32>), Vec<&MoeRecord>> = BTreeMap::new();
    for rec in records {
        if rec.variable == Variable::Combined {
            return Err(AssessError::InvalidParameter {
                name: "records",
                reason: "input is already combined over variables".into(),
            });
        }
        groups
            .entry((group_key(rec), rec.target_id))
            .or_default()
            .push(rec);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((_, target_id), mut members) in groups {
        members.sort_by_key(|r| r.variable.order_key());
        let moes: Vec<Moe> = members.iter().map(|r| r.moe.clone()).collect();
        let sample = members[0];
        out.push(MoeRecord {
            t: sample.t,
            tracker_id: sample.tracker_id,
            target_id,
            user_id: sample.user_id,
            variable: Variable::Combined,
            moe: combine_geometric(&moes)?,
            run_index: sample.run_index,
        });
    }
    Ok(out)
}
