//! Lorenz curves, grouped-data Gini coefficients and actual-vs-optimal tables.

use serde::Serialize;
use thiserror::Error;

use crate::model::{BoltzmannAllocation, GroupedDistribution, LorenzCurve};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("total income is zero")]
    ZeroTotalIncome,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Lorenz curve through the breakpoints of `(weight, income)` groups. Groups
/// are ordered ascending by income per unit of population weight, which for
/// equal weights is plain income order.
pub fn lorenz_curve(weights: &[f64], incomes: &[f64]) -> Result<LorenzCurve, MetricsError> {
    if weights.len() != incomes.len() {
        return Err(MetricsError::LengthMismatch {
            left: weights.len(),
            right: incomes.len(),
        });
    }
    let mut pairs: Vec<(f64, f64)> = weights
        .iter()
        .copied()
        .zip(incomes.iter().copied())
        .collect();
    pairs.sort_by(|a, b| (a.1 / a.0).total_cmp(&(b.1 / b.0)));

    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total <= 0.0 {
        return Err(MetricsError::ZeroTotalIncome);
    }

    let mut points = Vec::with_capacity(pairs.len() + 1);
    points.push((0.0, 0.0));
    let (mut cum_pop, mut cum_income) = (0.0, 0.0);
    for (w, y) in pairs {
        cum_pop += w;
        cum_income += y;
        points.push((cum_pop, cum_income / total));
    }
    Ok(LorenzCurve { points })
}

pub fn lorenz_of_distribution(dist: &GroupedDistribution) -> Result<LorenzCurve, MetricsError> {
    lorenz_curve(&dist.weights(), &dist.shares())
}

/// Lorenz curve of an allocation over the population groups of `dist`.
pub fn lorenz_of_allocation(
    dist: &GroupedDistribution,
    allocation: &BoltzmannAllocation,
) -> Result<LorenzCurve, MetricsError> {
    lorenz_curve(&dist.weights(), &allocation.incomes)
}

/// Trapezoid-rule Gini: `1 - sum (x_k - x_{k-1}) (y_k + y_{k-1})`.
pub fn gini(curve: &LorenzCurve) -> f64 {
    let area2: f64 = curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1))
        .sum();
    (1.0 - area2).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub group_index: usize,
    /// Published share, percent.
    pub actual_share: f64,
    /// `100 * P_i`, percent of total income.
    pub optimal_share: f64,
    /// `actual_share - optimal_share`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub gini_actual: f64,
    pub gini_optimal: f64,
}

pub fn compare_distributions(
    actual: &GroupedDistribution,
    optimal: &BoltzmannAllocation,
) -> Result<Comparison, MetricsError> {
    if actual.len() != optimal.probabilities.len() {
        return Err(MetricsError::LengthMismatch {
            left: actual.len(),
            right: optimal.probabilities.len(),
        });
    }
    let rows = actual
        .shares()
        .into_iter()
        .zip(optimal.shares_percent())
        .enumerate()
        .map(|(i, (a, o))| ComparisonRow {
            group_index: i + 1,
            actual_share: a,
            optimal_share: o,
            difference: a - o,
        })
        .collect();
    Ok(Comparison {
        rows,
        gini_actual: gini(&lorenz_of_distribution(actual)?),
        gini_optimal: gini(&lorenz_of_allocation(actual, optimal)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::allocate_income;
    use proptest::prelude::*;

    const USA: [f64; 5] = [3.1, 8.3, 14.1, 22.7, 51.9];
    const SOUTH_AFRICA: [f64; 5] = [2.4, 4.8, 8.2, 16.5, 68.2];

    fn dist(shares: &[f64]) -> GroupedDistribution {
        GroupedDistribution::equal_weights("t", 2000, shares).unwrap()
    }

    #[test]
    fn usa_lorenz_points() {
        let c = lorenz_of_distribution(&dist(&USA)).unwrap();
        // cumulative shares over 100.1
        let expected = [
            (0.0, 0.0),
            (0.2, 0.0310),
            (0.4, 0.1139),
            (0.6, 0.2547),
            (0.8, 0.4815),
            (1.0, 1.0),
        ];
        assert_eq!(c.points.len(), 6);
        for (p, e) in c.points.iter().zip(expected) {
            assert!((p.0 - e.0).abs() < 1e-9);
            assert!((p.1 - e.1).abs() < 5e-5, "{p:?} vs {e:?}");
        }
    }

    #[test]
    fn uniform_is_diagonal() {
        let c = lorenz_of_distribution(&dist(&[20.0; 5])).unwrap();
        for p in &c.points {
            assert!((p.0 - p.1).abs() < 1e-12);
        }
        assert_eq!(gini(&c), 0.0);
    }

    #[test]
    fn all_income_to_top_group() {
        let c = lorenz_of_distribution(&dist(&[0.0, 0.0, 0.0, 0.0, 100.0])).unwrap();
        assert!(c.points[..5].iter().all(|p| p.1 == 0.0));
        assert!((gini(&c) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn unequal_weights_order_by_income_per_weight() {
        let c = lorenz_curve(&[0.9, 0.1], &[60.0, 40.0]).unwrap();
        assert_eq!(c.points[1], (0.9, 0.6));
        let g = gini(&c);
        assert!((g - 0.3).abs() < 1e-12, "{g}");
    }

    #[test]
    fn zero_total_income() {
        assert_eq!(
            lorenz_of_distribution(&dist(&[0.0, 0.0])),
            Err(MetricsError::ZeroTotalIncome)
        );
    }

    #[test]
    fn published_ginis() {
        let g = gini(&lorenz_of_distribution(&dist(&USA)).unwrap());
        assert!((g - 0.45).abs() < 0.005, "{g}");
        let d = dist(&USA);
        let a = allocate_income(&d, &USA, 0.017).unwrap();
        let g = gini(&lorenz_of_allocation(&d, &a).unwrap());
        assert!((g - 0.17).abs() < 0.005, "{g}");
    }

    #[test]
    fn published_differences() {
        let d = dist(&USA);
        let c = compare_distributions(&d, &allocate_income(&d, &USA, 0.017).unwrap()).unwrap();
        let printed = [-11.2, -7.3, -3.2, 2.7, 19.1];
        for (r, e) in c.rows.iter().zip(printed) {
            assert!((r.difference - e).abs() < 0.1, "{r:?}");
        }

        let d = dist(&SOUTH_AFRICA);
        let a = allocate_income(&d, &SOUTH_AFRICA, 0.011).unwrap();
        let c = compare_distributions(&d, &a).unwrap();
        let printed = [-13.4, -11.4, -8.7, -2.0, 35.6];
        for (r, e) in c.rows.iter().zip(printed) {
            assert!((r.difference - e).abs() < 0.1, "{r:?}");
        }
    }

    #[test]
    fn identical_inputs_have_zero_difference() {
        let shares = [10.0, 20.0, 30.0, 40.0];
        let d = dist(&shares);
        let a = BoltzmannAllocation {
            beta: 0.0,
            probabilities: shares.iter().map(|s| s / 100.0).collect(),
            incomes: shares.to_vec(),
            factors: shares.to_vec(),
        };
        let c = compare_distributions(&d, &a).unwrap();
        assert!(c.rows.iter().all(|r| r.difference.abs() < 1e-12));
        assert!((c.gini_actual - c.gini_optimal).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths() {
        let d = dist(&USA);
        let a = allocate_income(&dist(&[1.0, 2.0]), &[1.0, 2.0], 0.1).unwrap();
        assert!(matches!(
            compare_distributions(&d, &a),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    fn shares() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..100.0, 2..12)
            .prop_filter("positive total", |v| v.iter().sum::<f64>() > 1e-6)
    }

    proptest! {
        #[test]
        fn gini_bounds_and_scale(s in shares(), c in 0.01f64..100.0) {
            let g = gini(&lorenz_of_distribution(&dist(&s)).unwrap());
            prop_assert!((0.0..1.0).contains(&g));
            let scaled: Vec<f64> = s.iter().map(|x| x * c).collect();
            let g2 = gini(&lorenz_of_distribution(&dist(&scaled)).unwrap());
            prop_assert!((g - g2).abs() < 1e-12);
        }

        #[test]
        fn lorenz_shape(s in shares()) {
            let c = lorenz_of_distribution(&dist(&s)).unwrap();
            prop_assert_eq!(c.points[0], (0.0, 0.0));
            let last = *c.points.last().unwrap();
            prop_assert!((last.0 - 1.0).abs() < 1e-9 && (last.1 - 1.0).abs() < 1e-9);
            let mut prev_slope = f64::NEG_INFINITY;
            for w in c.points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
                let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                prop_assert!(slope >= prev_slope - 1e-9);
                prev_slope = slope;
            }
        }

        #[test]
        fn pigou_dalton(mut s in prop::collection::vec(1.0f64..100.0, 3..10), frac in 0.05f64..0.45) {
            s.sort_by(f64::total_cmp);
            let (lo, hi) = (0, s.len() - 1);
            prop_assume!(s[hi] - s[lo] > 1.0);
            let before = gini(&lorenz_of_distribution(&dist(&s)).unwrap());
            // order-preserving transfer from the top group to the bottom group
            let gap = (s[hi] - s[hi - 1]).min(s[lo + 1] - s[lo]).min(s[hi] - s[lo]);
            prop_assume!(gap > 1e-3);
            let t = frac * gap;
            s[hi] -= t;
            s[lo] += t;
            let after = gini(&lorenz_of_distribution(&dist(&s)).unwrap());
            prop_assert!(after < before);
        }
    }
}
