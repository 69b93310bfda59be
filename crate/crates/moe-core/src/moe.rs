//! The measure of effectiveness itself and its closed-form special cases.
//!
//! A measure of effectiveness (MOE) is the probability-weighted acceptance
//! of a system's output: the expected value of a user function under the
//! distribution of what the system reported. It always lies in [0, 1].

use std::collections::HashSet;
use std::hash::Hash;

use statrs::function::erf::erf;

use crate::error::MoeError;
use crate::observation::DiscreteProbability;
use crate::user_function::{DiscreteAcceptance, UserFunction};

/// Slack allowed past the ends of [0, 1] before a value is rejected rather
/// than clamped. Covers accumulated rounding in otherwise exact operations.
const UNIT_RANGE_SLACK: f64 = 1e-12;

/// A measure of effectiveness: a value in [0, 1] tagged with how it was
/// computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Moe {
    value: f64,
    provenance: String,
}

impl Moe {
    /// Wraps a computed value. Values within a tiny rounding slack of
    /// [0, 1] are clamped; anything further out is rejected.
    pub fn new(value: f64, provenance: impl Into<String>) -> Result<Self, MoeError> {
        if !value.is_finite() || !(-UNIT_RANGE_SLACK..=1.0 + UNIT_RANGE_SLACK).contains(&value) {
            return Err(MoeError::InvalidParameter {
                name: "value",
                reason: format!("measure {value} outside [0, 1]"),
            });
        }
        Ok(Self {
            value: value.clamp(0.0, 1.0),
            provenance: provenance.into(),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// Fraction of the observed outcomes that are acceptable: the size of the
/// intersection over the size of `observed`.
///
/// Errors when `observed` is empty. A disjoint pair gives 0 and full
/// containment of `observed` in `acceptable` gives 1.
pub fn moe_sets<T: Eq + Hash>(
    observed: &HashSet<T>,
    acceptable: &HashSet<T>,
) -> Result<Moe, MoeError> {
    if observed.is_empty() {
        return Err(MoeError::EmptyInput {
            what: "observed outcome set",
        });
    }
    let hits = observed.intersection(acceptable).count();
    Moe::new(
        hits as f64 / observed.len() as f64,
        format!(
            "moe_sets: {hits} of {} observed outcomes acceptable",
            observed.len()
        ),
    )
}

/// Fraction of the acceptable outcomes that were observed, the complement
/// view of [`moe_sets`]: how much of the requirement the observations cover
/// rather than how acceptable the observations are.
pub fn coverage_fraction<T: Eq + Hash>(
    observed: &HashSet<T>,
    acceptable: &HashSet<T>,
) -> Result<f64, MoeError> {
    if acceptable.is_empty() {
        return Err(MoeError::EmptyInput {
            what: "acceptable outcome set",
        });
    }
    let hits = observed.intersection(acceptable).count();
    Ok(hits as f64 / acceptable.len() as f64)
}

/// Effectiveness of a single certain output: the user function at that
/// point.
pub fn moe_point(uf: &UserFunction, x: &[f64]) -> Result<Moe, MoeError> {
    let value = uf.eval_vec(x)?;
    Moe::new(value, "moe_point")
}

/// Effectiveness of an output known through equally weighted samples: the
/// mean of the user function over the samples.
pub fn moe_sample_mean(uf: &UserFunction, samples: &[Vec<f64>]) -> Result<Moe, MoeError> {
    if samples.is_empty() {
        return Err(MoeError::EmptyInput { what: "samples" });
    }
    let mut sum = 0.0;
    for s in samples {
        sum += uf.eval_vec(s)?;
    }
    Moe::new(
        sum / samples.len() as f64,
        format!("moe_sample_mean over {} samples", samples.len()),
    )
}

/// Expected acceptance when both the user function and the report are
/// Gaussian: an acceptance scale `sigma_s` against a report spread
/// `sigma_o`, both centered on the same value.
///
/// Equals `sigma_s / sqrt(sigma_s^2 + sigma_o^2)`.
pub fn moe_gaussian_closed(sigma_o: f64, sigma_s: f64) -> Result<Moe, MoeError> {
    for (name, v) in [("sigma_o", sigma_o), ("sigma_s", sigma_s)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(MoeError::InvalidParameter {
                name,
                reason: format!("must be positive and finite, got {v}"),
            });
        }
    }
    let value = sigma_s / (sigma_s * sigma_s + sigma_o * sigma_o).sqrt();
    Moe::new(
        value,
        format!("moe_gaussian_closed(sigma_o={sigma_o}, sigma_s={sigma_s})"),
    )
}

/// Probability that a Gaussian report with spread `sigma_o`, centered in a
/// tolerance window of half-width `half_width`, falls inside the window.
///
/// Equals `erf(half_width / (sqrt(2) sigma_o))`.
pub fn moe_window_gaussian(half_width: f64, sigma_o: f64) -> Result<Moe, MoeError> {
    for (name, v) in [("half_width", half_width), ("sigma_o", sigma_o)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(MoeError::InvalidParameter {
                name,
                reason: format!("must be positive and finite, got {v}"),
            });
        }
    }
    let value = erf(half_width / (std::f64::consts::SQRT_2 * sigma_o));
    Moe::new(
        value,
        format!("moe_window_gaussian(half_width={half_width}, sigma_o={sigma_o})"),
    )
}

/// Expected acceptance of a label-valued output: the dot product of the
/// acceptance scores with the class probabilities.
///
/// The two vectors must carry identical ordered label sets.
pub fn moe_discrete(
    acceptance: &DiscreteAcceptance,
    probability: &DiscreteProbability,
) -> Result<Moe, MoeError> {
    if acceptance.labels() != probability.labels() {
        return Err(MoeError::LabelMismatch {
            expected: acceptance.labels().join(", "),
            got: probability.labels().join(", "),
        });
    }
    let value: f64 = acceptance
        .values()
        .iter()
        .zip(probability.probs())
        .map(|(a, p)| a * p)
        .sum();
    Moe::new(
        value,
        format!("moe_discrete over {} labels", acceptance.labels().len()),
    )
}

/// Joint effectiveness across independent aspects: the product of the
/// per-aspect measures. Strict, in that one bad aspect drives the result
/// toward 0 no matter how good the others are.
pub fn combine_product(moes: &[Moe]) -> Result<Moe, MoeError> {
    if moes.is_empty() {
        return Err(MoeError::EmptyInput { what: "measures" });
    }
    let mut value = 1.0;
    for m in moes {
        value *= m.value();
    }
    Moe::new(value, format!("combine_product of {}", moes.len()))
}

/// Balanced overall effectiveness: the geometric mean of the measures.
///
/// When every input has the same value the result is that value, exactly.
/// Any zero input makes the result zero.
pub fn combine_geometric(moes: &[Moe]) -> Result<Moe, MoeError> {
    if moes.is_empty() {
        return Err(MoeError::EmptyInput { what: "measures" });
    }
    let value = geometric_mean(moes.iter().map(Moe::value));
    Moe::new(value, format!("combine_geometric of {}", moes.len()))
}

/// Geometric mean with exact passthrough of an all-equal input.
pub(crate) fn geometric_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    debug_assert!(!values.is_empty());
    if values.iter().all(|v| *v == values[0]) {
        return values[0];
    }
    if values.contains(&0.0) {
        return 0.0;
    }
    let mut product = 1.0;
    for v in &values {
        product *= v;
    }
    product.powf(1.0 / values.len() as f64)
}

/// Joint effectiveness of several users whose scored variables were sampled
/// together, preserving any dependence between them.
///
/// `joint_samples` holds one row per draw; row `k` carries the scalar value
/// seen by each of the J users at draw k. The estimate is the J-th root of
/// the mean over draws of the product of per-user acceptances.
pub fn moe_dependent_sampled(
    ufs: &[UserFunction],
    joint_samples: &[Vec<f64>],
) -> Result<Moe, MoeError> {
    if ufs.is_empty() {
        return Err(MoeError::EmptyInput {
            what: "user functions",
        });
    }
    if joint_samples.is_empty() {
        return Err(MoeError::EmptyInput {
            what: "joint samples",
        });
    }
    let j = ufs.len();
    let mut mean = 0.0;
    for row in joint_samples {
        if row.len() != j {
            return Err(MoeError::DimensionMismatch {
                expected: j,
                got: row.len(),
            });
        }
        let mut product = 1.0;
        for (uf, x) in ufs.iter().zip(row) {
            product *= uf.eval(*x)?;
        }
        mean += product;
    }
    mean /= joint_samples.len() as f64;
    let value = if j == 1 { mean } else { mean.powf(1.0 / j as f64) };
    Moe::new(
        value,
        format!(
            "moe_dependent_sampled: {j} users, {} draws",
            joint_samples.len()
        ),
    )
}

/// Effectiveness when the pairing between outputs and reality is unknown:
/// every admissible association is weighted equally, so the result is the
/// arithmetic mean of the per-association measures.
pub fn moe_ignorance_association(per_association_moes: &[Moe]) -> Result<Moe, MoeError> {
    if per_association_moes.is_empty() {
        return Err(MoeError::EmptyInput {
            what: "per-association measures",
        });
    }
    let sum: f64 = per_association_moes.iter().map(Moe::value).sum();
    Moe::new(
        sum / per_association_moes.len() as f64,
        format!(
            "moe_ignorance_association over {} associations",
            per_association_moes.len()
        ),
    )
}
