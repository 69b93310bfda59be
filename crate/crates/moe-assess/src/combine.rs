//! Combination of per-user effectiveness records into a single view.
//!
//! The arithmetic mode is the conservative weighted mean; the geometric
//! mode is the stringent joint-satisfaction value. For single-sample data
//! these equal evaluating the correspondingly combined user functions,
//! since both reduce to the same expressions over the per-user values.

use std::collections::BTreeMap;

use moe_core::{combine_geometric, Moe};

use crate::error::AssessError;
use crate::series::MoeRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    /// Weighted arithmetic mean; uniform weights by default.
    Arithmetic,
    /// Geometric mean. Weighting individual users has no meaning for a
    /// joint-satisfaction value, so weights are rejected.
    Geometric,
}

type GroupKey = (u32, u32, u64, Option<u32>, usize);

/// Combines the per-user records within every (run, tracker, instant,
/// target, variable) group into one record with `user_id = None`.
///
/// Every group must contain exactly one record per user, for the same set
/// of users throughout; an instant where some user is missing or
/// duplicated is an error rather than a silently thinner mean. A group
/// whose members all carry the same value passes that value through
/// unchanged in either mode.
pub fn combine_users(
    records: &[MoeRecord],
    mode: CombineMode,
    weights: Option<&[f64]>,
) -> Result<Vec<MoeRecord>, AssessError> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let mut user_ids: Vec<u32> = records
        .iter()
        .map(|r| {
            r.user_id.ok_or(AssessError::InvalidParameter {
                name: "records",
                reason: "already combined over users".into(),
            })
        })
        .collect::<Result<_, _>>()?;
    user_ids.sort_unstable();
    user_ids.dedup();

    let weights = match (mode, weights) {
        (CombineMode::Geometric, Some(_)) => {
            return Err(AssessError::InvalidParameter {
                name: "weights",
                reason: "geometric combination does not take user weights".into(),
            });
        }
        (CombineMode::Arithmetic, Some(w)) => {
            if w.len() != user_ids.len() {
                return Err(AssessError::InvalidParameter {
                    name: "weights",
                    reason: format!("{} weights for {} users", w.len(), user_ids.len()),
                });
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(AssessError::InvalidParameter {
                    name: "weights",
                    reason: "weights must be finite and non-negative".into(),
                });
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(AssessError::InvalidParameter {
                    name: "weights",
                    reason: format!("weights sum to {sum}, expected 1"),
                });
            }
            Some(w.to_vec())
        }
        (CombineMode::Arithmetic, None) => {
            Some(vec![1.0 / user_ids.len() as f64; user_ids.len()])
        }
        (CombineMode::Geometric, None) => None,
    };

    let mut groups: BTreeMap<GroupKey, Vec<&MoeRecord>> = BTreeMap::new();
    for rec in records {
        let key = (
            rec.run_index,
            rec.tracker_id,
            rec.t.to_bits(),
            rec.target_id,
            rec.variable.order_key(),
        );
        groups.entry(key).or_default().push(rec);
    }

    let mut out = Vec::with_capacity(groups.len());
    for (_, mut members) in groups {
        members.sort_by_key(|r| r.user_id);
        let present: Vec<u32> = members.iter().map(|r| r.user_id.unwrap()).collect();
        if present != user_ids {
            return Err(AssessError::MismatchedUsers {
                t: members[0].t,
                reason: format!("expected users {user_ids:?}, found {present:?}"),
            });
        }
        let first = members[0].moe.value();
        let moe = if members.iter().all(|r| r.moe.value() == first) {
            Moe::new(first, "combine_users: identical member values")?
        } else {
            match mode {
                CombineMode::Arithmetic => {
                    let w = weights.as_deref().unwrap();
                    let value = members
                        .iter()
                        .zip(w)
                        .map(|(r, w)| w * r.moe.value())
                        .sum::<f64>();
                    Moe::new(value, "combine_users: arithmetic mean over users")?
                }
                CombineMode::Geometric => {
                    let moes: Vec<Moe> =
                        members.iter().map(|r| r.moe.clone()).collect();
                    combine_geometric(&moes)?
                }
            }
        };
        let sample = members[0];
        out.push(MoeRecord {
            t: sample.t,
            tracker_id: sample.tracker_id,
            target_id: sample.target_id,
            user_id: None,
            variable: sample.variable,
            moe,
            run_index: sample.run_index,
        });
    }
    Ok(out)
}
