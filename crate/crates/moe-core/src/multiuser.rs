//! Combining several users into one composed acceptance function, and
//! merging their independent observation reports.
//!
//! Given I user functions over the same variable, the order-k composition
//! scores how well an output satisfies k users at once:
//!
//! ```text
//! F_k(x) = ( sum over k-subsets S of w_S * prod_{i in S} f_i(x) )^(1/k)
//! ```
//!
//! With uniform weights, k=1 is the arithmetic mean of the members and k=I
//! their geometric mean; intermediate k interpolates between the lenient
//! "satisfy someone" and the stringent "satisfy everyone" readings. The
//! subset weights are configuration, chosen to reflect relative importance;
//! they must be nonnegative and sum to 1.

use itertools::Itertools;

use crate::error::MoeError;
use crate::observation::{
    DiscreteProbability, GridDensity, ObsKind, ObservationDistribution,
};
use crate::quadrature::moe_integrate;
use crate::user_function::{UfKind, UserFunction};
use crate::Moe;

/// Tolerance on the sum of subset weights.
const WEIGHT_SUM_TOL: f64 = 1e-12;

fn binomial(n: usize, k: usize) -> Result<usize, MoeError> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(MoeError::InvalidParameter {
                name: "members",
                reason: format!("too many subset combinations for {n} members"),
            })?;
        acc /= (i + 1) as u128;
    }
    usize::try_from(acc).map_err(|_| MoeError::InvalidParameter {
        name: "members",
        reason: format!("too many subset combinations for {n} members"),
    })
}

/// Order-k weighted symmetric composition of member values, each in [0, 1].
///
/// `weights` has one entry per k-subset of member indices, in lexicographic
/// subset order. An all-equal value list returns that value exactly, for
/// any valid weights; the weighted sum collapses because the weights sum
/// to 1.
pub(crate) fn symmetric_combination(values: &[f64], k: usize, weights: &[f64]) -> f64 {
    debug_assert!(k >= 1 && k <= values.len());
    if values.iter().all(|v| *v == values[0]) {
        return values[0];
    }
    let mut acc = 0.0;
    for (subset, w) in (0..values.len()).combinations(k).zip(weights) {
        let mut product = *w;
        for i in subset {
            product *= values[i];
        }
        acc += product;
    }
    let composed = if k == 1 {
        acc
    } else {
        acc.powf(1.0 / k as f64)
    };
    composed.clamp(0.0, 1.0)
}

/// A symmetric composition of several users' acceptance functions.
#[derive(Debug, Clone, PartialEq)]
pub struct UserCombination {
    members: Vec<UserFunction>,
    order: usize,
    weights: Vec<f64>,
}

impl UserCombination {
    /// Composes `members` at the given order. `weights` assigns one weight
    /// per order-sized subset of members in lexicographic order and
    /// defaults to uniform.
    pub fn new(
        members: Vec<UserFunction>,
        order: usize,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, MoeError> {
        if members.is_empty() {
            return Err(MoeError::EmptyInput {
                what: "combination members",
            });
        }
        if order < 1 || order > members.len() {
            return Err(MoeError::InvalidParameter {
                name: "order",
                reason: format!(
                    "order {order} outside [1, {}] for {} members",
                    members.len(),
                    members.len()
                ),
            });
        }
        let dim = members[0].dim();
        for m in &members[1..] {
            if m.dim() != dim {
                return Err(MoeError::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
        }
        let first_labels = member_labels(&members[0]);
        for m in &members[1..] {
            match (&first_labels, member_labels(m)) {
                (None, None) => {}
                (Some(expected), Some(got)) if *expected == got => {}
                (Some(expected), Some(got)) => {
                    return Err(MoeError::LabelMismatch {
                        expected: expected.join(", "),
                        got: got.join(", "),
                    });
                }
                _ => {
                    return Err(MoeError::Unsupported {
                        reason: "cannot combine label-valued members with real-valued members"
                            .into(),
                    });
                }
            }
        }
        let subsets = binomial(members.len(), order)?;
        let weights = match weights {
            None => vec![1.0 / subsets as f64; subsets],
            Some(w) => {
                if w.len() != subsets {
                    return Err(MoeError::DimensionMismatch {
                        expected: subsets,
                        got: w.len(),
                    });
                }
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(MoeError::InvalidParameter {
                        name: "weights",
                        reason: "weights must be finite and nonnegative".into(),
                    });
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(MoeError::InvalidParameter {
                        name: "weights",
                        reason: format!("weights sum to {sum}, not 1"),
                    });
                }
                w
            }
        };
        Ok(Self {
            members,
            order,
            weights,
        })
    }

    pub fn members(&self) -> &[UserFunction] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub(crate) fn eval_at(&self, x: &[f64]) -> Result<f64, MoeError> {
        let mut values = Vec::with_capacity(self.members.len());
        for m in &self.members {
            values.push(m.eval_vec(x)?);
        }
        Ok(symmetric_combination(&values, self.order, &self.weights))
    }

    pub(crate) fn eval_at_label(&self, label: &str) -> Result<f64, MoeError> {
        let mut values = Vec::with_capacity(self.members.len());
        for m in &self.members {
            values.push(m.eval_label(label)?);
        }
        Ok(symmetric_combination(&values, self.order, &self.weights))
    }
}

fn member_labels(uf: &UserFunction) -> Option<Vec<String>> {
    match &uf.kind {
        UfKind::Discrete(d) => Some(d.labels().to_vec()),
        UfKind::Combined(c) => member_labels(&c.members()[0]),
        _ => None,
    }
}

/// Composes several users' acceptance functions into one user function that
/// scores joint satisfaction of `order`-sized groups. See [`UserCombination`].
pub fn combine_user_functions(
    members: Vec<UserFunction>,
    order: usize,
    weights: Option<Vec<f64>>,
) -> Result<UserFunction, MoeError> {
    Ok(UserFunction::combined(UserCombination::new(
        members, order, weights,
    )?))
}

/// Merges independent reports of the same quantity into one distribution by
/// the normalized pointwise product.
///
/// All inputs must share a variant: scalar Gaussians combine in closed form
/// (precisions add, means weighted by precision), label probabilities and
/// gridded densities multiply pointwise and renormalize. For dependent
/// sources this product law is only an approximation.
pub fn combine_observation_pdfs(
    dists: &[ObservationDistribution],
) -> Result<ObservationDistribution, MoeError> {
    if dists.len() < 2 {
        return Err(MoeError::InvalidParameter {
            name: "dists",
            reason: format!("need at least two distributions, got {}", dists.len()),
        });
    }
    match &dists[0].kind {
        ObsKind::Gaussian1d { .. } => {
            let mut precision_sum = 0.0;
            let mut weighted_mean = 0.0;
            for d in dists {
                let ObsKind::Gaussian1d { mean, sigma_o } = &d.kind else {
                    return mixed_variants();
                };
                let precision = 1.0 / (sigma_o * sigma_o);
                precision_sum += precision;
                weighted_mean += precision * mean;
            }
            ObservationDistribution::gaussian_1d(
                weighted_mean / precision_sum,
                (1.0 / precision_sum).sqrt(),
            )
        }
        ObsKind::Discrete(first) => {
            let mut product = first.probs().to_vec();
            for d in &dists[1..] {
                let ObsKind::Discrete(p) = &d.kind else {
                    return mixed_variants();
                };
                if p.labels() != first.labels() {
                    return Err(MoeError::LabelMismatch {
                        expected: first.labels().join(", "),
                        got: p.labels().join(", "),
                    });
                }
                for (acc, q) in product.iter_mut().zip(p.probs()) {
                    *acc *= q;
                }
            }
            let sum: f64 = product.iter().sum();
            if sum <= 0.0 {
                return Err(MoeError::ZeroNormalizer);
            }
            for v in &mut product {
                *v /= sum;
            }
            Ok(ObservationDistribution::discrete(DiscreteProbability::new(
                first.labels().to_vec(),
                product,
            )?))
        }
        ObsKind::Grid(first) => {
            let mut product = first.density().to_vec();
            for d in &dists[1..] {
                let ObsKind::Grid(g) = &d.kind else {
                    return mixed_variants();
                };
                if g.axes() != first.axes() {
                    return Err(MoeError::Unsupported {
                        reason: "gridded densities must share identical axes".into(),
                    });
                }
                for (acc, q) in product.iter_mut().zip(g.density()) {
                    *acc *= q;
                }
            }
            let probe = GridDensity::raw_mass(first.axes(), &product);
            if probe <= 0.0 {
                return Err(MoeError::ZeroNormalizer);
            }
            for v in &mut product {
                *v /= probe;
            }
            Ok(ObservationDistribution::grid(GridDensity::new(
                first.axes().to_vec(),
                product,
            )?))
        }
        _ => Err(MoeError::Unsupported {
            reason: "only Gaussian, discrete, and gridded reports can be merged".into(),
        }),
    }
}

fn mixed_variants() -> Result<ObservationDistribution, MoeError> {
    Err(MoeError::Unsupported {
        reason: "all distributions must share the same variant".into(),
    })
}

/// Effectiveness of a composed user function against a merged observation
/// distribution; a convenience over [`moe_integrate`] for the multi-user
/// case.
pub fn moe_multiuser(
    composed_uf: &UserFunction,
    composed_dist: &ObservationDistribution,
    abs_tol: f64,
) -> Result<Moe, MoeError> {
    moe_integrate(composed_uf, composed_dist, abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(values: &[f64]) -> Vec<UserFunction> {
        values
            .iter()
            .map(|v| UserFunction::tabulated(vec![(0.0, *v)]).unwrap())
            .collect()
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial(4, 2).unwrap(), 6);
        assert_eq!(binomial(5, 1).unwrap(), 5);
        assert_eq!(binomial(5, 5).unwrap(), 1);
        assert_eq!(binomial(3, 7).unwrap(), 0);
    }

    #[test]
    fn order_one_is_arithmetic_mean() {
        let c = UserCombination::new(members(&[1.0, 0.0]), 1, None).unwrap();
        assert_eq!(c.eval_at(&[0.0]).unwrap(), 0.5);
    }

    #[test]
    fn full_order_is_geometric_mean() {
        let c = UserCombination::new(members(&[1.0, 0.0]), 2, None).unwrap();
        assert_eq!(c.eval_at(&[0.0]).unwrap(), 0.0);
        let c = UserCombination::new(members(&[0.9, 0.4]), 2, None).unwrap();
        let got = c.eval_at(&[0.0]).unwrap();
        assert!((got - (0.9f64 * 0.4).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identical_members_collapse_for_every_order() {
        for k in 1..=4 {
            let c = UserCombination::new(members(&[0.5, 0.5, 0.5, 0.5]), k, None).unwrap();
            assert_eq!(c.eval_at(&[0.0]).unwrap(), 0.5);
        }
    }

    #[test]
    fn three_member_pair_order_value() {
        let c = UserCombination::new(members(&[0.9, 0.8, 0.6]), 2, None).unwrap();
        let expected = ((0.72 + 0.54 + 0.48) / 3.0f64).sqrt();
        let got = c.eval_at(&[0.0]).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.761_58).abs() < 5e-6);
    }

    #[test]
    fn weights_must_match_subset_count_and_sum() {
        let r = UserCombination::new(members(&[0.5, 0.6, 0.7]), 2, Some(vec![0.5, 0.5]));
        assert!(matches!(r, Err(MoeError::DimensionMismatch { .. })));
        let r = UserCombination::new(members(&[0.5, 0.6]), 1, Some(vec![0.3, 0.3]));
        assert!(matches!(r, Err(MoeError::InvalidParameter { .. })));
        let r = UserCombination::new(members(&[0.5, 0.6]), 1, Some(vec![-0.5, 1.5]));
        assert!(r.is_err());
        let ok = UserCombination::new(members(&[0.5, 0.6]), 1, Some(vec![0.25, 0.75]));
        assert!(ok.is_ok());
    }

    #[test]
    fn order_bounds_enforced() {
        assert!(UserCombination::new(members(&[0.5]), 0, None).is_err());
        assert!(UserCombination::new(members(&[0.5]), 2, None).is_err());
        assert!(UserCombination::new(vec![], 1, None).is_err());
    }

    #[test]
    fn weighted_order_one_is_weighted_mean() {
        let c =
            UserCombination::new(members(&[1.0, 0.5]), 1, Some(vec![0.8, 0.2])).unwrap();
        let got = c.eval_at(&[0.0]).unwrap();
        assert!((got - 0.9).abs() < 1e-15);
    }

    #[test]
    fn combined_user_function_evaluates_like_members() {
        let f = combine_user_functions(
            vec![
                UserFunction::gaussian_exp(1.0).unwrap(),
                UserFunction::gaussian_exp(2.0).unwrap(),
            ],
            1,
            None,
        )
        .unwrap();
        let x: f64 = 1.3;
        let expected = ((-x * x / 2.0).exp() + (-x * x / 8.0).exp()) / 2.0;
        assert!((f.eval(x).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn label_members_combine_over_labels() {
        use crate::user_function::DiscreteAcceptance;
        let d1 = DiscreteAcceptance::new(vec!["E".into(), "F".into()], vec![1.0, 0.0]).unwrap();
        let d2 = DiscreteAcceptance::new(vec!["E".into(), "F".into()], vec![0.5, 0.5]).unwrap();
        let f = combine_user_functions(
            vec![UserFunction::discrete(d1), UserFunction::discrete(d2)],
            1,
            None,
        )
        .unwrap();
        assert_eq!(f.eval_label("E").unwrap(), 0.75);
        assert!(f.eval(0.0).is_err());
    }

    #[test]
    fn mixed_label_and_real_members_rejected() {
        use crate::user_function::DiscreteAcceptance;
        let d = DiscreteAcceptance::new(vec!["E".into()], vec![1.0]).unwrap();
        let r = UserCombination::new(
            vec![
                UserFunction::discrete(d),
                UserFunction::gaussian_exp(1.0).unwrap(),
            ],
            1,
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn identical_gaussians_sharpen_by_sqrt2() {
        let g = ObservationDistribution::gaussian_1d(3.0, 2.0).unwrap();
        let merged = combine_observation_pdfs(&[g.clone(), g]).unwrap();
        let ObsKind::Gaussian1d { mean, sigma_o } = merged.kind else {
            panic!("expected a scalar Gaussian");
        };
        assert!((mean - 3.0).abs() < 1e-15);
        assert!((sigma_o - 2.0 / std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gaussian_merge_weights_means_by_precision() {
        let a = ObservationDistribution::gaussian_1d(0.0, 1.0).unwrap();
        let b = ObservationDistribution::gaussian_1d(10.0, 3.0).unwrap();
        let merged = combine_observation_pdfs(&[a, b]).unwrap();
        let ObsKind::Gaussian1d { mean, sigma_o } = merged.kind else {
            panic!("expected a scalar Gaussian");
        };
        assert!((mean - 1.0).abs() < 1e-12);
        assert!((sigma_o - (0.9f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn discrete_merge_is_product_renormalized() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let p = ObservationDistribution::discrete(
            DiscreteProbability::new(labels.clone(), vec![0.6, 0.4]).unwrap(),
        );
        let uniform = ObservationDistribution::discrete(
            DiscreteProbability::new(labels.clone(), vec![0.5, 0.5]).unwrap(),
        );
        let merged = combine_observation_pdfs(&[p, uniform]).unwrap();
        let probs = merged.as_discrete().unwrap().probs();
        assert!((probs[0] - 0.6).abs() < 1e-15);
        assert!((probs[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn disjoint_discrete_supports_rejected() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let p = ObservationDistribution::discrete(
            DiscreteProbability::new(labels.clone(), vec![1.0, 0.0]).unwrap(),
        );
        let q = ObservationDistribution::discrete(
            DiscreteProbability::new(labels, vec![0.0, 1.0]).unwrap(),
        );
        assert!(matches!(
            combine_observation_pdfs(&[p, q]),
            Err(MoeError::ZeroNormalizer)
        ));
    }

    #[test]
    fn mixed_variants_rejected() {
        let g = ObservationDistribution::gaussian_1d(0.0, 1.0).unwrap();
        let p = ObservationDistribution::discrete(
            DiscreteProbability::new(vec!["a".into()], vec![1.0]).unwrap(),
        );
        assert!(combine_observation_pdfs(&[g, p]).is_err());
    }

    #[test]
    fn single_distribution_rejected() {
        let g = ObservationDistribution::gaussian_1d(0.0, 1.0).unwrap();
        assert!(combine_observation_pdfs(std::slice::from_ref(&g)).is_err());
    }

    #[test]
    fn point_samples_cannot_merge() {
        let a = ObservationDistribution::point_sample(vec![0.0]).unwrap();
        let b = ObservationDistribution::point_sample(vec![1.0]).unwrap();
        assert!(matches!(
            combine_observation_pdfs(&[a, b]),
            Err(MoeError::Unsupported { .. })
        ));
    }

    #[test]
    fn grid_product_of_identical_gaussians_matches_closed_form() {
        let n = 801;
        let axis: Vec<f64> = (0..n).map(|i| -8.0 + 16.0 * i as f64 / (n - 1) as f64).collect();
        let density: Vec<f64> = axis
            .iter()
            .map(|x| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt())
            .collect();
        let g = ObservationDistribution::grid(
            GridDensity::new(vec![axis.clone()], density).unwrap(),
        );
        let merged = combine_observation_pdfs(&[g.clone(), g]).unwrap();
        let grid = merged.as_grid().unwrap();
        let sharper = 1.0 / std::f64::consts::SQRT_2;
        for (x, d) in axis.iter().zip(grid.density()) {
            let expected =
                (-0.5 * x * x / (sharper * sharper)).exp()
                    / (sharper * (2.0 * std::f64::consts::PI).sqrt());
            assert!((d - expected).abs() < 1e-6, "at {x}: {d} vs {expected}");
        }
    }

    #[test]
    fn moe_multiuser_point_reductions() {
        let ms = vec![
            UserFunction::gaussian_exp(1.0).unwrap(),
            UserFunction::gaussian_exp(2.0).unwrap(),
        ];
        let x = 1.0;
        let v1 = ms[0].eval(x).unwrap();
        let v2 = ms[1].eval(x).unwrap();
        let point = ObservationDistribution::point_sample(vec![x]).unwrap();

        let lenient = combine_user_functions(ms.clone(), 1, None).unwrap();
        let m = moe_multiuser(&lenient, &point, 1e-8).unwrap();
        assert!((m.value() - (v1 + v2) / 2.0).abs() < 1e-15);

        let stringent = combine_user_functions(ms, 2, None).unwrap();
        let m = moe_multiuser(&stringent, &point, 1e-8).unwrap();
        assert!((m.value() - (v1 * v2).sqrt()).abs() < 1e-15);
    }
}
