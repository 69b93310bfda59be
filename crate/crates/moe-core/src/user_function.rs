//! User functions: maps from system output to acceptance in [0, 1].
//!
//! A user function scores a single system output value (or vector, or class
//! label) by how acceptable it is to a particular user. The score is 1 for a
//! fully satisfying output and falls toward 0 as the output degrades. Most
//! shapes here score a scalar error quantity, so the argument is typically a
//! deviation from a reference rather than a raw output.

use crate::error::MoeError;
use crate::multiuser::UserCombination;
use crate::observation::DiscreteProbability;

fn require_finite(name: &'static str, value: f64) -> Result<(), MoeError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(MoeError::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

/// Acceptance scores over an ordered set of class labels.
///
/// Scores live in [0, 1] and need not sum to anything in particular; the
/// convention is that the most acceptable class scores 1. Use
/// [`DiscreteAcceptance::from_acceptance_weights`] to build one from raw
/// nonnegative weights by dividing through by the largest weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteAcceptance {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl DiscreteAcceptance {
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self, MoeError> {
        if labels.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "discrete acceptance labels",
            });
        }
        if labels.len() != values.len() {
            return Err(MoeError::DimensionMismatch {
                expected: labels.len(),
                got: values.len(),
            });
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[i + 1..].contains(a) {
                return Err(MoeError::InvalidParameter {
                    name: "labels",
                    reason: format!("duplicate label `{a}`"),
                });
            }
        }
        for v in &values {
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                return Err(MoeError::InvalidParameter {
                    name: "values",
                    reason: format!("acceptance {v} outside [0, 1]"),
                });
            }
        }
        Ok(Self { labels, values })
    }

    /// Builds acceptance scores from nonnegative weights by normalizing so
    /// the largest weight maps to 1.
    pub fn from_acceptance_weights(
        labels: Vec<String>,
        weights: Vec<f64>,
    ) -> Result<Self, MoeError> {
        let max = weights.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        if !max.is_finite() || max <= 0.0 {
            return Err(MoeError::InvalidParameter {
                name: "weights",
                reason: format!("largest weight must be positive and finite, got {max}"),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MoeError::InvalidParameter {
                name: "weights",
                reason: "weights must be finite and nonnegative".into(),
            });
        }
        let values = weights.iter().map(|w| w / max).collect();
        Self::new(labels, values)
    }

    /// Turns class probabilities into acceptance scores by dividing through
    /// by the largest probability, so the likeliest class scores exactly 1.
    pub fn from_probability(p: &DiscreteProbability) -> Self {
        let max = p.probs().iter().fold(0.0f64, |a, b| a.max(*b));
        Self {
            labels: p.labels().to_vec(),
            values: p.probs().iter().map(|v| v / max).collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Acceptance of one label.
    pub fn value_of(&self, label: &str) -> Result<f64, MoeError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.values[i])
            .ok_or_else(|| MoeError::UnknownLabel {
                label: label.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum UfKind {
    GaussianExp { sigma_s: f64 },
    RationalHalf { a: f64 },
    UniformWindow { lower: f64, upper: f64 },
    Discrete(DiscreteAcceptance),
    Tabulated { knots: Vec<(f64, f64)> },
    Separable { factors: Vec<UserFunction> },
    Combined(UserCombination),
}

/// A user's acceptance function.
///
/// Constructed through the checked constructors below, which reject
/// degenerate parameters up front. Evaluation then always yields a value in
/// [0, 1].
///
/// # Example
///
/// ```
/// use moe_core::UserFunction;
///
/// let f = UserFunction::gaussian_exp(2.0).unwrap();
/// assert_eq!(f.eval(0.0).unwrap(), 1.0);
/// assert!((f.eval(2.0).unwrap() - 0.5f64.exp().recip()).abs() < 1e-15);
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct UserFunction {
    pub(crate) kind: UfKind,
}

impl UserFunction {
    /// Bell curve `exp(-x^2 / (2 sigma_s^2))`; `sigma_s` sets how quickly
    /// acceptance falls off with the deviation `x`.
    pub fn gaussian_exp(sigma_s: f64) -> Result<Self, MoeError> {
        require_finite("sigma_s", sigma_s)?;
        if sigma_s <= 0.0 {
            return Err(MoeError::InvalidParameter {
                name: "sigma_s",
                reason: format!("must be positive, got {sigma_s}"),
            });
        }
        Ok(Self {
            kind: UfKind::GaussianExp { sigma_s },
        })
    }

    /// Heavy-tailed curve `a^2 / (a^2 + x^2)`, which drops to one half at
    /// `|x| = a`.
    pub fn rational_half(a: f64) -> Result<Self, MoeError> {
        require_finite("a", a)?;
        if a <= 0.0 {
            return Err(MoeError::InvalidParameter {
                name: "a",
                reason: format!("must be positive, got {a}"),
            });
        }
        Ok(Self {
            kind: UfKind::RationalHalf { a },
        })
    }

    /// All-or-nothing window: 1 on `[lower, upper]`, 0 elsewhere.
    pub fn uniform_window(lower: f64, upper: f64) -> Result<Self, MoeError> {
        require_finite("lower", lower)?;
        require_finite("upper", upper)?;
        if lower >= upper {
            return Err(MoeError::InvalidParameter {
                name: "lower",
                reason: format!("window is empty: lower {lower} >= upper {upper}"),
            });
        }
        Ok(Self {
            kind: UfKind::UniformWindow { lower, upper },
        })
    }

    /// Acceptance over class labels.
    pub fn discrete(acceptance: DiscreteAcceptance) -> Self {
        Self {
            kind: UfKind::Discrete(acceptance),
        }
    }

    /// Piecewise-linear curve through `(x, value)` knots, clamped to the end
    /// values outside the knot range. Knot x values must strictly increase
    /// and values must lie in [0, 1].
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self, MoeError> {
        if knots.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "tabulated knots",
            });
        }
        for (x, v) in &knots {
            require_finite("knots", *x)?;
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                return Err(MoeError::InvalidParameter {
                    name: "knots",
                    reason: format!("knot value {v} outside [0, 1]"),
                });
            }
        }
        for pair in knots.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(MoeError::InvalidParameter {
                    name: "knots",
                    reason: format!(
                        "knot x values must strictly increase ({} then {})",
                        pair[0].0, pair[1].0
                    ),
                });
            }
        }
        Ok(Self {
            kind: UfKind::Tabulated { knots },
        })
    }

    /// Product of one scalar user function per coordinate, for scoring a
    /// vector output one coordinate at a time.
    pub fn separable(factors: Vec<UserFunction>) -> Result<Self, MoeError> {
        if factors.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "separable factors",
            });
        }
        for f in &factors {
            if f.dim() != 1 {
                return Err(MoeError::Unsupported {
                    reason: "separable factors must each score a scalar".into(),
                });
            }
            if matches!(f.kind, UfKind::Discrete(_)) {
                return Err(MoeError::Unsupported {
                    reason: "separable factors must score real values, not labels".into(),
                });
            }
        }
        Ok(Self {
            kind: UfKind::Separable { factors },
        })
    }

    /// Symmetric combination of several users' functions; see
    /// [`UserCombination`].
    pub fn combined(combination: UserCombination) -> Self {
        Self {
            kind: UfKind::Combined(combination),
        }
    }

    /// Number of real coordinates this function scores. Label-valued
    /// functions report 1.
    pub fn dim(&self) -> usize {
        match &self.kind {
            UfKind::Separable { factors } => factors.len(),
            UfKind::Combined(c) => c.dim(),
            _ => 1,
        }
    }

    /// The discrete acceptance behind this function, when it is one.
    pub fn as_discrete(&self) -> Option<&DiscreteAcceptance> {
        match &self.kind {
            UfKind::Discrete(d) => Some(d),
            _ => None,
        }
    }

    /// Scores a scalar output.
    pub fn eval(&self, x: f64) -> Result<f64, MoeError> {
        require_finite("x", x)?;
        match &self.kind {
            UfKind::GaussianExp { sigma_s } => Ok((-x * x / (2.0 * sigma_s * sigma_s)).exp()),
            UfKind::RationalHalf { a } => Ok(a * a / (a * a + x * x)),
            UfKind::UniformWindow { lower, upper } => {
                Ok(if x >= *lower && x <= *upper { 1.0 } else { 0.0 })
            }
            UfKind::Discrete(_) => Err(MoeError::Unsupported {
                reason: "discrete user function scores labels; use eval_label".into(),
            }),
            UfKind::Tabulated { knots } => Ok(interp_clamped(knots, x)),
            UfKind::Separable { factors } => {
                if factors.len() == 1 {
                    factors[0].eval(x)
                } else {
                    Err(MoeError::DimensionMismatch {
                        expected: factors.len(),
                        got: 1,
                    })
                }
            }
            UfKind::Combined(c) => c.eval_at(&[x]),
        }
    }

    /// Scores a vector output. Scalar functions accept length-1 slices.
    pub fn eval_vec(&self, x: &[f64]) -> Result<f64, MoeError> {
        match &self.kind {
            UfKind::Separable { factors } => {
                if x.len() != factors.len() {
                    return Err(MoeError::DimensionMismatch {
                        expected: factors.len(),
                        got: x.len(),
                    });
                }
                let mut product = 1.0;
                for (f, xi) in factors.iter().zip(x) {
                    product *= f.eval(*xi)?;
                }
                Ok(product)
            }
            UfKind::Combined(c) => c.eval_at(x),
            _ => {
                if x.len() != 1 {
                    return Err(MoeError::DimensionMismatch {
                        expected: 1,
                        got: x.len(),
                    });
                }
                self.eval(x[0])
            }
        }
    }

    /// Scores a class label. Defined for discrete functions and for
    /// combinations of discrete functions.
    pub fn eval_label(&self, label: &str) -> Result<f64, MoeError> {
        match &self.kind {
            UfKind::Discrete(d) => d.value_of(label),
            UfKind::Combined(c) => c.eval_at_label(label),
            _ => Err(MoeError::Unsupported {
                reason: "this user function scores real values, not labels".into(),
            }),
        }
    }

    /// Points where the function is discontinuous or has a kink, used to
    /// split quadrature intervals. Only meaningful for scalar functions.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            UfKind::UniformWindow { lower, upper } => vec![*lower, *upper],
            UfKind::Tabulated { knots } => knots.iter().map(|(x, _)| *x).collect(),
            UfKind::Separable { factors } if factors.len() == 1 => factors[0].breakpoints(),
            UfKind::Combined(c) => {
                let mut pts: Vec<f64> = c
                    .members()
                    .iter()
                    .flat_map(|m| m.breakpoints())
                    .collect();
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            }
            _ => Vec::new(),
        }
    }
}

fn interp_clamped(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|(k, _)| *k < x);
    let (x0, v0) = knots[i - 1];
    let (x1, v1) = knots[i];
    let frac = (x - x0) / (x1 - x0);
    v0 + frac * (v1 - v0)
}
