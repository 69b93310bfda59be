//! Numerical evaluation of expected acceptance.
//!
//! [`moe_integrate`] computes the expectation of a user function under an
//! observation distribution, choosing the evaluation route by distribution
//! kind: exact evaluation for points and label probabilities, a sample mean
//! for sample sets, adaptive Simpson quadrature for scalar Gaussians, and a
//! tensor trapezoid rule for gridded densities.

use crate::error::MoeError;
use crate::moe::Moe;
use crate::observation::{advance_index, GridDensity, ObsKind, ObservationDistribution};
use crate::user_function::UserFunction;

/// Default absolute tolerance for adaptive quadrature.
pub const DEFAULT_ABS_TOL: f64 = 1e-8;

/// Total interval-split budget for one integration call. Exceeding it means
/// the integrand is far rougher than any acceptance curve should be.
pub const SUBDIVISION_BUDGET: usize = 1_000_000;

/// Half-width of the integration range around a Gaussian mean, in standard
/// deviations. Mass outside is below 1e-23, far under any tolerance in use.
pub const GAUSSIAN_TAIL_SIGMAS: f64 = 10.0;

/// Deepest interval halving allowed before the local estimate is accepted
/// as is. At this depth the subinterval is at the resolution of f64.
const MAX_DEPTH: u32 = 64;

fn simpson_rule(h: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

struct Adaptive<'a, F: Fn(f64) -> f64> {
    f: &'a F,
    budget: usize,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, MoeError> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        if depth >= MAX_DEPTH || lm <= a || rm >= b {
            return Ok(whole);
        }
        if self.budget < 2 {
            return Err(MoeError::QuadratureBudget {
                budget: SUBDIVISION_BUDGET,
            });
        }
        self.budget -= 2;
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson_rule(m - a, fa, flm, fm);
        let right = simpson_rule(b - m, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        let l = self.refine(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Integrates `f` over `[a, b]` by adaptive Simpson quadrature to absolute
/// tolerance `abs_tol`, drawing interval splits from `budget`.
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    budget: &mut usize,
) -> Result<f64, MoeError> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_rule(b - a, fa, fm, fb);
    let mut state = Adaptive { f, budget: *budget };
    let result = state.refine(a, fa, b, fb, m, fm, whole, abs_tol, 0);
    *budget = state.budget;
    result
}

/// Integrates `f` over `[lo, hi]`, splitting first at the given breakpoints
/// so that jumps and kinks land on piece boundaries.
fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    abs_tol: f64,
) -> Result<f64, MoeError> {
    let mut cuts: Vec<f64> = vec![lo];
    cuts.extend(breakpoints.iter().copied().filter(|c| *c > lo && *c < hi));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts.len() - 1;
    let piece_tol = abs_tol / pieces as f64;
    let mut budget = SUBDIVISION_BUDGET;
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += adaptive_simpson(f, pair[0], pair[1], piece_tol, &mut budget)?;
    }
    Ok(total)
}

fn gaussian_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn check_abs_tol(abs_tol: f64) -> Result<(), MoeError> {
    if !abs_tol.is_finite() || abs_tol <= 0.0 {
        return Err(MoeError::InvalidParameter {
            name: "abs_tol",
            reason: format!("must be positive and finite, got {abs_tol}"),
        });
    }
    Ok(())
}

/// Expected acceptance of `uf` under `dist`.
///
/// `abs_tol` bounds the absolute quadrature error on the routes that
/// integrate numerically; [`DEFAULT_ABS_TOL`] is a good default. Exact
/// routes (points, samples, labels) ignore it.
///
/// Analytic densities are supported in one dimension; gridded densities up
/// to three. Anything else is reported as unsupported rather than
/// approximated silently.
pub fn moe_integrate(
    uf: &UserFunction,
    dist: &ObservationDistribution,
    abs_tol: f64,
) -> Result<Moe, MoeError> {
    check_abs_tol(abs_tol)?;
    match &dist.kind {
        ObsKind::PointSample { x } => {
            let value = uf.eval_vec(x)?;
            Moe::new(value, "moe_integrate: point evaluation")
        }
        ObsKind::SampleSet { samples } => {
            let mut sum = 0.0;
            for s in samples {
                sum += uf.eval_vec(s)?;
            }
            Moe::new(
                sum / samples.len() as f64,
                format!("moe_integrate: mean over {} samples", samples.len()),
            )
        }
        ObsKind::Discrete(p) => {
            let mut value = 0.0;
            for (label, prob) in p.labels().iter().zip(p.probs()) {
                value += uf.eval_label(label)? * prob;
            }
            Moe::new(
                value,
                format!("moe_integrate: dot product over {} labels", p.labels().len()),
            )
        }
        ObsKind::Gaussian1d { mean, sigma_o } => {
            integrate_gaussian_1d(uf, *mean, *sigma_o, abs_tol)
        }
        ObsKind::GaussianNd { mean, cov } => {
            if mean.len() == 1 {
                integrate_gaussian_1d(uf, mean[0], cov[(0, 0)].sqrt(), abs_tol)
            } else {
                Err(MoeError::Unsupported {
                    reason: format!(
                        "analytic densities are integrated in one dimension only, got {}",
                        mean.len()
                    ),
                })
            }
        }
        ObsKind::Grid(g) => integrate_grid(uf, g, abs_tol),
    }
}

fn integrate_gaussian_1d(
    uf: &UserFunction,
    mean: f64,
    sigma: f64,
    abs_tol: f64,
) -> Result<Moe, MoeError> {
    if uf.dim() != 1 {
        return Err(MoeError::DimensionMismatch {
            expected: uf.dim(),
            got: 1,
        });
    }
    uf.eval(mean)?;
    let span = GAUSSIAN_TAIL_SIGMAS * sigma;
    let f = |x: f64| uf.eval(x).unwrap_or(0.0) * gaussian_pdf(x, mean, sigma);
    let value = integrate_with_breakpoints(
        &f,
        mean - span,
        mean + span,
        &uf.breakpoints(),
        abs_tol,
    )?;
    moe_from_quadrature(
        value,
        abs_tol,
        format!("moe_integrate: adaptive simpson, abs_tol={abs_tol}"),
    )
}

fn integrate_grid(uf: &UserFunction, grid: &GridDensity, _abs_tol: f64) -> Result<Moe, MoeError> {
    if grid.dim() > 3 {
        return Err(MoeError::Unsupported {
            reason: format!(
                "gridded densities are integrated up to three dimensions, got {}",
                grid.dim()
            ),
        });
    }
    if uf.dim() != grid.dim() {
        return Err(MoeError::DimensionMismatch {
            expected: uf.dim(),
            got: grid.dim(),
        });
    }
    let weights: Vec<Vec<f64>> = grid.axes().iter().map(|a| GridDensity::axis_weights(a)).collect();
    let shape = grid.shape();
    let mut idx = vec![0usize; shape.len()];
    let mut coords = vec![0.0; shape.len()];
    let mut value = 0.0;
    for d in grid.density() {
        if *d != 0.0 {
            let mut w = *d;
            for (k, i) in idx.iter().enumerate() {
                coords[k] = grid.axes()[k][*i];
                w *= weights[k][*i];
            }
            value += w * uf.eval_vec(&coords)?;
        }
        advance_index(&mut idx, &shape);
    }
    moe_from_quadrature(
        value,
        1e-9,
        format!("moe_integrate: trapezoid rule on a {}-d grid", grid.dim()),
    )
}

/// Wraps a quadrature result, clamping overshoot up to the quadrature
/// tolerance and rejecting anything worse.
fn moe_from_quadrature(value: f64, slack: f64, provenance: String) -> Result<Moe, MoeError> {
    if !value.is_finite() || value < -slack || value > 1.0 + slack {
        return Err(MoeError::InvalidParameter {
            name: "value",
            reason: format!("integration produced {value}, outside [0, 1]"),
        });
    }
    Moe::new(value.clamp(0.0, 1.0), provenance)
}

/// Integrates a gridded joint density down to the given dimensions.
///
/// `keep_dims` lists the dimensions to keep, strictly increasing. The
/// integrated-out mass is removed with the same trapezoid rule used by
/// [`moe_integrate`], and the marginal is renormalized to unit mass. Keeping
/// every dimension returns the input unchanged.
pub fn marginalize_grid(joint: &GridDensity, keep_dims: &[usize]) -> Result<GridDensity, MoeError> {
    let dim = joint.dim();
    if keep_dims.is_empty() {
        return Err(MoeError::EmptyInput {
            what: "kept dimensions",
        });
    }
    for pair in keep_dims.windows(2) {
        if pair[0] >= pair[1] {
            return Err(MoeError::InvalidParameter {
                name: "keep_dims",
                reason: "dimensions must strictly increase".into(),
            });
        }
    }
    if keep_dims[keep_dims.len() - 1] >= dim {
        return Err(MoeError::InvalidParameter {
            name: "keep_dims",
            reason: format!("dimension {} out of range for a {dim}-d grid", keep_dims[keep_dims.len() - 1]),
        });
    }
    if keep_dims.len() == dim {
        return Ok(joint.clone());
    }

    let shape = joint.shape();
    let mut kept = vec![false; dim];
    for d in keep_dims {
        kept[*d] = true;
    }
    let dropped_weights: Vec<Option<Vec<f64>>> = joint
        .axes()
        .iter()
        .enumerate()
        .map(|(d, axis)| (!kept[d]).then(|| GridDensity::axis_weights(axis)))
        .collect();

    let out_axes: Vec<Vec<f64>> = keep_dims.iter().map(|d| joint.axes()[*d].clone()).collect();
    let out_shape: Vec<usize> = keep_dims.iter().map(|d| shape[*d]).collect();
    let mut strides = vec![1usize; out_shape.len()];
    for k in (0..out_shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * out_shape[k + 1];
    }

    let mut out = vec![0.0; out_shape.iter().product()];
    let mut idx = vec![0usize; dim];
    for rho in joint.density() {
        let mut w = *rho;
        for (d, maybe) in dropped_weights.iter().enumerate() {
            if let Some(ws) = maybe {
                w *= ws[idx[d]];
            }
        }
        let flat: usize = keep_dims
            .iter()
            .zip(&strides)
            .map(|(d, s)| idx[*d] * s)
            .sum();
        out[flat] += w;
        advance_index(&mut idx, &shape);
    }
    GridDensity::new(out_axes, out)
}
