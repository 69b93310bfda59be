//! Distributions describing what a system actually reported.
//!
//! The system output is rarely a single certain number. This module models it
//! as a probability distribution: a point, a bag of samples, class
//! probabilities, a Gaussian, or a density tabulated on a grid.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::MoeError;

/// Largest allowed deviation of a probability vector's sum from 1.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// Largest allowed deviation of a grid density's trapezoid mass from 1
/// before the grid is rejected. Within this tolerance the density is
/// renormalized to unit mass.
pub const GRID_MASS_TOL: f64 = 1e-3;

/// Probabilities over an ordered set of class labels, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProbability {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl DiscreteProbability {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self, MoeError> {
        if labels.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "discrete probability labels",
            });
        }
        if labels.len() != probs.len() {
            return Err(MoeError::DimensionMismatch {
                expected: labels.len(),
                got: probs.len(),
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
        for p in &probs {
            if !p.is_finite() || *p < 0.0 {
                return Err(MoeError::InvalidParameter {
                    name: "probs",
                    reason: format!("probability {p} must be finite and nonnegative"),
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(MoeError::InvalidParameter {
                name: "probs",
                reason: format!("probabilities sum to {sum}, not 1"),
            });
        }
        Ok(Self { labels, probs })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, label: &str) -> Result<f64, MoeError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probs[i])
            .ok_or_else(|| MoeError::UnknownLabel {
                label: label.to_string(),
            })
    }
}

/// A probability density tabulated on a rectangular grid.
///
/// `axes` holds the strictly increasing node coordinates of each dimension
/// and `density` the nonnegative density values in row-major order with the
/// last axis varying fastest. The trapezoid-rule mass must be within
/// [`GRID_MASS_TOL`] of 1; the stored density is rescaled so the mass is
/// exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    axes: Vec<Vec<f64>>,
    density: Vec<f64>,
}

impl GridDensity {
    pub fn new(axes: Vec<Vec<f64>>, density: Vec<f64>) -> Result<Self, MoeError> {
        if axes.is_empty() {
            return Err(MoeError::EmptyInput { what: "grid axes" });
        }
        for axis in &axes {
            if axis.len() < 2 {
                return Err(MoeError::InvalidParameter {
                    name: "axes",
                    reason: "each axis needs at least two nodes".into(),
                });
            }
            for x in axis {
                if !x.is_finite() {
                    return Err(MoeError::InvalidParameter {
                        name: "axes",
                        reason: format!("node {x} is not finite"),
                    });
                }
            }
            for pair in axis.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(MoeError::InvalidParameter {
                        name: "axes",
                        reason: format!(
                            "axis nodes must strictly increase ({} then {})",
                            pair[0], pair[1]
                        ),
                    });
                }
            }
        }
        let expected: usize = axes.iter().map(Vec::len).product();
        if density.len() != expected {
            return Err(MoeError::DimensionMismatch {
                expected,
                got: density.len(),
            });
        }
        for d in &density {
            if !d.is_finite() || *d < 0.0 {
                return Err(MoeError::InvalidParameter {
                    name: "density",
                    reason: format!("density {d} must be finite and nonnegative"),
                });
            }
        }
        let mut grid = Self { axes, density };
        let mass = grid.trapezoid_mass();
        if (mass - 1.0).abs() > GRID_MASS_TOL {
            return Err(MoeError::InvalidParameter {
                name: "density",
                reason: format!("trapezoid mass is {mass}, too far from 1"),
            });
        }
        for d in &mut grid.density {
            *d /= mass;
        }
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Trapezoid-rule node weights along one axis.
    pub(crate) fn axis_weights(axis: &[f64]) -> Vec<f64> {
        let n = axis.len();
        let mut w = vec![0.0; n];
        w[0] = (axis[1] - axis[0]) / 2.0;
        w[n - 1] = (axis[n - 1] - axis[n - 2]) / 2.0;
        for i in 1..n - 1 {
            w[i] = (axis[i + 1] - axis[i - 1]) / 2.0;
        }
        w
    }

    /// Integral of the stored density by the tensor trapezoid rule.
    pub fn trapezoid_mass(&self) -> f64 {
        Self::raw_mass(&self.axes, &self.density)
    }

    /// Trapezoid-rule mass of a raw density array over the given axes.
    pub(crate) fn raw_mass(axes: &[Vec<f64>], density: &[f64]) -> f64 {
        let weights: Vec<Vec<f64>> = axes.iter().map(|a| Self::axis_weights(a)).collect();
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let mut mass = 0.0;
        let mut idx = vec![0usize; shape.len()];
        for d in density {
            let w: f64 = idx.iter().zip(&weights).map(|(i, ws)| ws[*i]).product();
            mass += w * d;
            advance_index(&mut idx, &shape);
        }
        mass
    }
}

/// Advances a row-major multi-index (last axis fastest). Wraps to all zeros
/// after the final index.
pub(crate) fn advance_index(idx: &mut [usize], shape: &[usize]) {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < shape[d] {
            return;
        }
        idx[d] = 0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ObsKind {
    PointSample { x: Vec<f64> },
    SampleSet { samples: Vec<Vec<f64>> },
    Discrete(DiscreteProbability),
    Gaussian1d { mean: f64, sigma_o: f64 },
    GaussianNd { mean: DVector<f64>, cov: DMatrix<f64> },
    Grid(GridDensity),
}

/// What the system reported, as a probability distribution over outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationDistribution {
    pub(crate) kind: ObsKind,
}

impl ObservationDistribution {
    /// A single output known exactly.
    pub fn point_sample(x: Vec<f64>) -> Result<Self, MoeError> {
        if x.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "point sample",
            });
        }
        for v in &x {
            if !v.is_finite() {
                return Err(MoeError::InvalidParameter {
                    name: "x",
                    reason: format!("coordinate {v} is not finite"),
                });
            }
        }
        Ok(Self {
            kind: ObsKind::PointSample { x },
        })
    }

    /// Equally weighted samples of the output, all of the same dimension.
    pub fn sample_set(samples: Vec<Vec<f64>>) -> Result<Self, MoeError> {
        if samples.is_empty() {
            return Err(MoeError::EmptyInput { what: "sample set" });
        }
        let dim = samples[0].len();
        if dim == 0 {
            return Err(MoeError::EmptyInput {
                what: "sample coordinates",
            });
        }
        for s in &samples {
            if s.len() != dim {
                return Err(MoeError::DimensionMismatch {
                    expected: dim,
                    got: s.len(),
                });
            }
            for v in s {
                if !v.is_finite() {
                    return Err(MoeError::InvalidParameter {
                        name: "samples",
                        reason: format!("coordinate {v} is not finite"),
                    });
                }
            }
        }
        Ok(Self {
            kind: ObsKind::SampleSet { samples },
        })
    }

    /// Class probabilities for a label-valued output.
    pub fn discrete(probability: DiscreteProbability) -> Self {
        Self {
            kind: ObsKind::Discrete(probability),
        }
    }

    /// Scalar Gaussian with the given mean and standard deviation.
    pub fn gaussian_1d(mean: f64, sigma_o: f64) -> Result<Self, MoeError> {
        if !mean.is_finite() {
            return Err(MoeError::InvalidParameter {
                name: "mean",
                reason: format!("must be finite, got {mean}"),
            });
        }
        if !sigma_o.is_finite() || sigma_o <= 0.0 {
            return Err(MoeError::InvalidParameter {
                name: "sigma_o",
                reason: format!("must be positive and finite, got {sigma_o}"),
            });
        }
        Ok(Self {
            kind: ObsKind::Gaussian1d { mean, sigma_o },
        })
    }

    /// Multivariate Gaussian. The covariance must be symmetric positive
    /// definite.
    pub fn gaussian_nd(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, MoeError> {
        if mean.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "gaussian mean",
            });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(MoeError::InvalidParameter {
                name: "mean",
                reason: "all coordinates must be finite".into(),
            });
        }
        check_spd("cov", &cov)?;
        if cov.nrows() != mean.len() {
            return Err(MoeError::DimensionMismatch {
                expected: mean.len(),
                got: cov.nrows(),
            });
        }
        Ok(Self {
            kind: ObsKind::GaussianNd { mean, cov },
        })
    }

    /// Density tabulated on a rectangular grid.
    pub fn grid(grid: GridDensity) -> Self {
        Self {
            kind: ObsKind::Grid(grid),
        }
    }

    /// Dimension of the output this distribution describes. Label-valued
    /// outputs report 1.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ObsKind::PointSample { x } => x.len(),
            ObsKind::SampleSet { samples } => samples[0].len(),
            ObsKind::Discrete(_) => 1,
            ObsKind::Gaussian1d { .. } => 1,
            ObsKind::GaussianNd { mean, .. } => mean.len(),
            ObsKind::Grid(g) => g.dim(),
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteProbability> {
        match &self.kind {
            ObsKind::Discrete(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridDensity> {
        match &self.kind {
            ObsKind::Grid(g) => Some(g),
            _ => None,
        }
    }
}

/// Relative tolerance for the symmetry check on covariance matrices.
const SYMMETRY_REL_TOL: f64 = 1e-9;

/// Verifies that `m` is square, symmetric, and positive definite, returning
/// its Cholesky factor.
pub(crate) fn check_spd(
    name: &'static str,
    m: &DMatrix<f64>,
) -> Result<Cholesky<f64, nalgebra::Dyn>, MoeError> {
    if m.nrows() != m.ncols() || m.is_empty() {
        return Err(MoeError::NotPositiveDefinite { name });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(MoeError::NotPositiveDefinite { name });
    }
    let scale = m.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_REL_TOL * scale {
                return Err(MoeError::NotPositiveDefinite { name });
            }
        }
    }
    Cholesky::new(m.clone()).ok_or(MoeError::NotPositiveDefinite { name })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn probability_sum_enforced() {
        let ok = DiscreteProbability::new(vec!["a".into(), "b".into()], vec![0.4, 0.6]);
        assert!(ok.is_ok());
        let off = DiscreteProbability::new(vec!["a".into(), "b".into()], vec![0.4, 0.7]);
        assert!(off.is_err());
        let slightly_off =
            DiscreteProbability::new(vec!["a".into(), "b".into()], vec![0.4, 0.6 + 1e-10]);
        assert!(slightly_off.is_ok());
    }

    #[test]
    fn negative_probability_rejected() {
        let r = DiscreteProbability::new(vec!["a".into(), "b".into()], vec![-0.1, 1.1]);
        assert!(r.is_err());
    }

    #[test]
    fn grid_mass_renormalized_to_one() {
        let axes = vec![vec![0.0, 0.5, 1.0]];
        let density = vec![1.0005, 1.0005, 1.0005];
        let g = GridDensity::new(axes, density).unwrap();
        assert!((g.trapezoid_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_mass_too_far_from_one_rejected() {
        let axes = vec![vec![0.0, 1.0]];
        let density = vec![2.0, 2.0];
        assert!(GridDensity::new(axes, density).is_err());
    }

    #[test]
    fn grid_needs_two_nodes_per_axis() {
        assert!(GridDensity::new(vec![vec![0.0]], vec![1.0]).is_err());
    }

    #[test]
    fn grid_rejects_unordered_axis() {
        let r = GridDensity::new(vec![vec![0.0, 0.0, 1.0]], vec![1.0, 1.0, 1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn grid_density_length_checked() {
        let r = GridDensity::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]], vec![1.0, 1.0]);
        assert!(matches!(r, Err(MoeError::DimensionMismatch { .. })));
    }

    #[test]
    fn trapezoid_mass_of_uniform_2d() {
        let axes = vec![vec![0.0, 1.0, 2.0], vec![0.0, 0.5]];
        let density = vec![1.0; 6];
        let g = GridDensity::new(axes, density).unwrap();
        assert!((g.trapezoid_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_1d_rejects_bad_sigma() {
        assert!(ObservationDistribution::gaussian_1d(0.0, 0.0).is_err());
        assert!(ObservationDistribution::gaussian_1d(0.0, -1.0).is_err());
        assert!(ObservationDistribution::gaussian_1d(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn gaussian_nd_requires_spd() {
        let mean = dvector![0.0, 0.0];
        let asym = dmatrix![1.0, 0.5; 0.2, 1.0];
        assert!(ObservationDistribution::gaussian_nd(mean.clone(), asym).is_err());
        let indef = dmatrix![1.0, 2.0; 2.0, 1.0];
        assert!(ObservationDistribution::gaussian_nd(mean.clone(), indef).is_err());
        let ok = dmatrix![2.0, 0.3; 0.3, 1.0];
        assert!(ObservationDistribution::gaussian_nd(mean, ok).is_ok());
    }

    #[test]
    fn sample_set_requires_consistent_dims() {
        let r = ObservationDistribution::sample_set(vec![vec![1.0, 2.0], vec![3.0]]);
        assert!(matches!(r, Err(MoeError::DimensionMismatch { .. })));
    }

    #[test]
    fn advance_index_walks_row_major() {
        let shape = [2, 3];
        let mut idx = vec![0, 0];
        let mut seen = vec![idx.clone()];
        for _ in 0..5 {
            advance_index(&mut idx, &shape);
            seen.push(idx.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
    }
}
