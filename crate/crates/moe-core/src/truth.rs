//! Effectiveness when ground truth is itself measured imperfectly.
//!
//! The system output x' is scored not against the true value, which is
//! unknown, but against a reference measurement y' from a more accurate
//! instrument whose error has a known distribution. The acceptance is then
//! averaged over that reference error, either in closed form for Gaussian
//! acceptance and Gaussian reference error, or by Monte Carlo sampling for
//! anything else.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::MoeError;
use crate::moe::Moe;
use crate::observation::check_spd;
use crate::user_function::UserFunction;

/// Default draw count for the sampled estimator.
pub const DEFAULT_TRUTH_SAMPLES: usize = 100_000;

/// A system observation paired with the reference measurement of the same
/// quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedObservation {
    x_prime: DVector<f64>,
    y_prime: DVector<f64>,
}

impl PairedObservation {
    pub fn new(x_prime: DVector<f64>, y_prime: DVector<f64>) -> Result<Self, MoeError> {
        if x_prime.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "paired observation",
            });
        }
        if x_prime.len() != y_prime.len() {
            return Err(MoeError::DimensionMismatch {
                expected: x_prime.len(),
                got: y_prime.len(),
            });
        }
        if x_prime.iter().chain(y_prime.iter()).any(|v| !v.is_finite()) {
            return Err(MoeError::InvalidParameter {
                name: "pair",
                reason: "all coordinates must be finite".into(),
            });
        }
        Ok(Self { x_prime, y_prime })
    }

    pub fn dim(&self) -> usize {
        self.x_prime.len()
    }

    /// System-minus-reference difference, the observable part of the error.
    pub fn difference(&self) -> DVector<f64> {
        &self.x_prime - &self.y_prime
    }
}

enum RefKind {
    Gaussian { cov: DMatrix<f64> },
    Samples { draws: Vec<DVector<f64>> },
}

/// Distribution of the reference instrument's error.
pub struct ReferenceErrorModel {
    kind: RefKind,
}

impl ReferenceErrorModel {
    /// Zero-mean Gaussian reference error with the given covariance.
    pub fn gaussian(cov: DMatrix<f64>) -> Result<Self, MoeError> {
        check_spd("reference covariance", &cov)?;
        Ok(Self {
            kind: RefKind::Gaussian { cov },
        })
    }

    /// Empirical reference error given by recorded draws.
    pub fn samples(draws: Vec<DVector<f64>>) -> Result<Self, MoeError> {
        if draws.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "reference error draws",
            });
        }
        let dim = draws[0].len();
        if dim == 0 {
            return Err(MoeError::EmptyInput {
                what: "reference error coordinates",
            });
        }
        for d in &draws {
            if d.len() != dim {
                return Err(MoeError::DimensionMismatch {
                    expected: dim,
                    got: d.len(),
                });
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(MoeError::InvalidParameter {
                    name: "draws",
                    reason: "all coordinates must be finite".into(),
                });
            }
        }
        Ok(Self {
            kind: RefKind::Samples { draws },
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            RefKind::Gaussian { cov } => cov.nrows(),
            RefKind::Samples { draws } => draws[0].len(),
        }
    }
}

/// A Monte Carlo effectiveness estimate with its statistical precision.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEstimate {
    pub moe: Moe,
    pub standard_error: f64,
}

/// Closed-form effectiveness for a Gaussian acceptance (covariance `c_s`)
/// scored against a reference with Gaussian error (covariance `c_lambda`).
///
/// With d the system-minus-reference difference, the value is
/// `sqrt(det C / det C_lambda) * exp(-d' C_o^-1 d / 2)` where
/// `C^-1 = C_s^-1 + C_lambda^-1` and
/// `C_o^-1 = C_lambda^-1 - C_lambda^-1 C C_lambda^-1`.
pub fn moe_uncertain_truth_gaussian(
    pair: &PairedObservation,
    c_s: &DMatrix<f64>,
    c_lambda: &DMatrix<f64>,
) -> Result<Moe, MoeError> {
    let chol_s = check_spd("c_s", c_s)?;
    check_spd("c_lambda", c_lambda)?;
    let n = pair.dim();
    if c_s.nrows() != n {
        return Err(MoeError::DimensionMismatch {
            expected: n,
            got: c_s.nrows(),
        });
    }
    if c_lambda.nrows() != n {
        return Err(MoeError::DimensionMismatch {
            expected: n,
            got: c_lambda.nrows(),
        });
    }

    // By the Woodbury identity C_o^-1 = (C_s + C_lambda)^-1, and the
    // determinant ratio reduces to det C_s / det (C_s + C_lambda). Working
    // with the sum directly stays accurate when `c_lambda` is nearly
    // singular, where the literal difference of inverses cancels badly.
    let total = c_s + c_lambda;
    let chol_total = check_spd("c_s + c_lambda", &total)?;
    let prefactor = (chol_s.determinant() / chol_total.determinant()).sqrt();

    let d = pair.difference();
    let quad = d.dot(&chol_total.solve(&d));

    let value = (prefactor * (-0.5 * quad).exp()).clamp(0.0, 1.0);
    Moe::new(
        value,
        format!("moe_uncertain_truth_gaussian: dim {n}, |d|={:.6e}", d.norm()),
    )
}

/// Monte Carlo effectiveness for any acceptance function against an
/// uncertain reference: the mean of `uf` over `d + lambda` with `lambda`
/// drawn from the reference error model.
///
/// Gaussian models draw `sample_count` values from the given seed, so the
/// result is reproducible; empirical models use every recorded draw and
/// ignore `sample_count` and `seed`. The standard error of the mean is
/// returned alongside the estimate.
pub fn moe_uncertain_truth_sampled(
    uf: &UserFunction,
    model: &ReferenceErrorModel,
    pair: &PairedObservation,
    sample_count: usize,
    seed: u64,
) -> Result<SampledEstimate, MoeError> {
    if sample_count == 0 {
        return Err(MoeError::InvalidParameter {
            name: "sample_count",
            reason: "need at least one draw".into(),
        });
    }
    if model.dim() != pair.dim() {
        return Err(MoeError::DimensionMismatch {
            expected: pair.dim(),
            got: model.dim(),
        });
    }
    let d = pair.difference();
    let mut point = vec![0.0; pair.dim()];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let push = |value: f64, sum: &mut f64, sum_sq: &mut f64| {
        *sum += value;
        *sum_sq += value * value;
    };

    let drawn: usize;
    match &model.kind {
        RefKind::Gaussian { cov } => {
            let chol = check_spd("reference covariance", cov)?;
            let l = chol.l();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = pair.dim();
            let mut z = DVector::zeros(n);
            for _ in 0..sample_count {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                let lambda = &l * &z;
                for (p, (di, li)) in point.iter_mut().zip(d.iter().zip(lambda.iter())) {
                    *p = di + li;
                }
                push(uf.eval_vec(&point)?, &mut sum, &mut sum_sq);
            }
            drawn = sample_count;
        }
        RefKind::Samples { draws } => {
            for lambda in draws {
                for (p, (di, li)) in point.iter_mut().zip(d.iter().zip(lambda.iter())) {
                    *p = di + li;
                }
                push(uf.eval_vec(&point)?, &mut sum, &mut sum_sq);
            }
            drawn = draws.len();
        }
    }

    let mean = sum / drawn as f64;
    let variance = (sum_sq / drawn as f64 - mean * mean).max(0.0);
    let standard_error = (variance / drawn as f64).sqrt();
    let moe = Moe::new(
        mean,
        format!("moe_uncertain_truth_sampled: {drawn} draws, se={standard_error:.3e}"),
    )?;
    Ok(SampledEstimate {
        moe,
        standard_error,
    })
}
