//! Shared domain types: grouped income distributions, sigmoid welfare
//! parameters, Boltzmann allocations, optimization results and Lorenz curves.
//!
//! Every type here is immutable once constructed. Constructors enforce the
//! invariants so downstream modules can assume them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for population weights summing to one in memory.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("income share {share} of group {index} is negative")]
    NegativeShare { index: usize, share: f64 },
    #[error("population weights are invalid: {reason}")]
    BadWeights { reason: String },
    #[error("at least 2 groups are required, got {count}")]
    TooFewGroups { count: usize },
    #[error("non-finite value in group {index}")]
    NonFinite { index: usize },
    #[error("critical values must satisfy 0 < L < H (L = {low}, H = {high})")]
    DegenerateWidth { low: f64, high: f64 },
    #[error("steepness must be positive and finite, got {0}")]
    BadSteepness(f64),
}

/// One population subgroup: its fraction of the population and its percent
/// share of total income.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub population_weight: f64,
    pub income_share: f64,
}

impl Group {
    pub fn new(population_weight: f64, income_share: f64) -> Self {
        Self {
            population_weight,
            income_share,
        }
    }
}

/// Income shares of one country-year, ascending by share.
///
/// `total_income` is the raw sum of the shares in percent units. It is not
/// forced to 100: a published row summing to 100.1 keeps that total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct GroupedDistribution {
    label: String,
    year: i32,
    groups: Vec<Group>,
    total_income: f64,
}

#[derive(Deserialize)]
struct RawDistribution {
    label: String,
    year: i32,
    groups: Vec<Group>,
}

impl TryFrom<RawDistribution> for GroupedDistribution {
    type Error = ModelError;

    fn try_from(raw: RawDistribution) -> Result<Self, Self::Error> {
        GroupedDistribution::new(raw.label, raw.year, raw.groups)
    }
}

impl GroupedDistribution {
    /// Validates and sorts `groups` ascending by income share (stable).
    pub fn new(
        label: impl Into<String>,
        year: i32,
        groups: Vec<Group>,
    ) -> Result<Self, ModelError> {
        Self::with_weight_tolerance(label, year, groups, WEIGHT_SUM_TOLERANCE)
    }

    /// Like [`GroupedDistribution::new`] but accepts weight sums within
    /// `tolerance` of one. Sums outside [`WEIGHT_SUM_TOLERANCE`] are rescaled
    /// so the stored weights always meet the in-memory invariant.
    pub fn with_weight_tolerance(
        label: impl Into<String>,
        year: i32,
        mut groups: Vec<Group>,
        tolerance: f64,
    ) -> Result<Self, ModelError> {
        if groups.len() < 2 {
            return Err(ModelError::TooFewGroups {
                count: groups.len(),
            });
        }
        for (index, g) in groups.iter().enumerate() {
            if !g.income_share.is_finite() || !g.population_weight.is_finite() {
                return Err(ModelError::NonFinite { index });
            }
            if g.income_share < 0.0 {
                return Err(ModelError::NegativeShare {
                    index,
                    share: g.income_share,
                });
            }
            if g.population_weight <= 0.0 || g.population_weight > 1.0 {
                return Err(ModelError::BadWeights {
                    reason: format!(
                        "weight {} of group {index} is outside (0, 1]",
                        g.population_weight
                    ),
                });
            }
        }
        let weight_sum: f64 = groups.iter().map(|g| g.population_weight).sum();
        if (weight_sum - 1.0).abs() > tolerance {
            return Err(ModelError::BadWeights {
                reason: format!("weights sum to {weight_sum}, expected 1"),
            });
        }
        if (weight_sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            for g in &mut groups {
                g.population_weight /= weight_sum;
            }
        }

        groups.sort_by(|a, b| a.income_share.total_cmp(&b.income_share));
        let total_income = groups.iter().map(|g| g.income_share).sum();

        Ok(Self {
            label: label.into(),
            year,
            groups,
            total_income,
        })
    }

    /// Equal-weight distribution from shares alone.
    pub fn equal_weights(
        label: impl Into<String>,
        year: i32,
        shares: &[f64],
    ) -> Result<Self, ModelError> {
        if shares.len() < 2 {
            return Err(ModelError::TooFewGroups {
                count: shares.len(),
            });
        }
        let w = 1.0 / shares.len() as f64;
        let groups = shares.iter().map(|&s| Group::new(w, s)).collect();
        Self::new(label, year, groups)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn total_income(&self) -> f64 {
        self.total_income
    }

    pub fn shares(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.income_share).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.population_weight).collect()
    }

    /// True when all weights are identical.
    pub fn has_equal_weights(&self) -> bool {
        let first = self.groups[0].population_weight;
        self.groups
            .iter()
            .all(|g| (g.population_weight - first).abs() <= WEIGHT_SUM_TOLERANCE)
    }

    /// Per-group household income, taken as the group's share value: every
    /// household within a group is assumed to earn the same.
    pub fn representative_incomes(&self) -> Vec<f64> {
        self.shares()
    }
}

/// Constants of the sigmoid individual welfare function
/// `U(y) = 1 / (1 + exp(alpha * (mu - y)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareParams {
    /// Critical low income `L` (percent).
    pub low: f64,
    /// Critical high income `H` (percent).
    pub high: f64,
    /// Midpoint `mu = (L + H) / 2`, where `U = 0.5`.
    pub midpoint: f64,
    /// Steepness `alpha` (1/percent).
    pub steepness: f64,
}

impl WelfareParams {
    /// `mu = (L + H) / 2` and `alpha = 6 / (H - L)`, which puts
    /// `U(L) = 1/(1+e^3)` and `U(H) = 1/(1+e^-3)`.
    pub fn from_critical_values(low: f64, high: f64) -> Result<Self, ModelError> {
        check_critical(low, high)?;
        Ok(Self {
            low,
            high,
            midpoint: (low + high) / 2.0,
            steepness: 6.0 / (high - low),
        })
    }

    /// Critical values with a freely chosen steepness.
    pub fn with_steepness(low: f64, high: f64, steepness: f64) -> Result<Self, ModelError> {
        check_critical(low, high)?;
        if !(steepness.is_finite() && steepness > 0.0) {
            return Err(ModelError::BadSteepness(steepness));
        }
        Ok(Self {
            low,
            high,
            midpoint: (low + high) / 2.0,
            steepness,
        })
    }
}

fn check_critical(low: f64, high: f64) -> Result<(), ModelError> {
    if !(low.is_finite() && high.is_finite() && low > 0.0 && high - low > 0.0) {
        return Err(ModelError::DegenerateWidth { low, high });
    }
    Ok(())
}

/// Income allocated by a Boltzmann distribution at inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoltzmannAllocation {
    pub beta: f64,
    /// Probability that a unit of income goes to each group; sums to one.
    pub probabilities: Vec<f64>,
    /// `total_income * probability`, percent units.
    pub incomes: Vec<f64>,
    /// Income-distribution factors the probabilities were computed from.
    pub factors: Vec<f64>,
}

impl BoltzmannAllocation {
    /// Allocated incomes as percent of the total (`100 * P_i`).
    pub fn shares_percent(&self) -> Vec<f64> {
        self.probabilities.iter().map(|p| 100.0 * p).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub beta_star: f64,
    pub welfare_star: f64,
    pub optimal_allocation: BoltzmannAllocation,
    /// `(beta, welfare)` on the search grid, ascending in beta.
    pub sweep: Vec<(f64, f64)>,
    /// Central-difference estimate of dW/dbeta at `beta_star`.
    pub derivative_at_star: f64,
}

/// Piecewise-linear Lorenz curve through group breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzCurve {
    /// `(cumulative population, cumulative income)`, from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quintiles(shares: [f64; 5]) -> Vec<Group> {
        shares.iter().map(|&s| Group::new(0.2, s)).collect()
    }

    #[test]
    fn usa_row_keeps_raw_total() {
        let d =
            GroupedDistribution::new("USA", 2019, quintiles([3.1, 8.3, 14.1, 22.7, 51.9])).unwrap();
        assert!((d.total_income() - 100.1).abs() < 1e-9);
        assert_eq!(d.representative_incomes(), vec![3.1, 8.3, 14.1, 22.7, 51.9]);
    }

    #[test]
    fn symmetric_two_groups() {
        let d = GroupedDistribution::new(
            "sym",
            2000,
            vec![Group::new(0.5, 50.0), Group::new(0.5, 50.0)],
        )
        .unwrap();
        assert_eq!(d.total_income(), 100.0);
    }

    #[test]
    fn rejects_negative_share() {
        let groups = vec![
            Group::new(0.5, 10.0),
            Group::new(0.25, -1.0),
            Group::new(0.25, 20.0),
        ];
        assert!(matches!(
            GroupedDistribution::new("x", 1, groups),
            Err(ModelError::NegativeShare { index: 1, .. })
        ));
    }

    #[test]
    fn rejects_bad_weights() {
        let groups = vec![Group::new(0.5, 10.0), Group::new(0.4, 20.0)];
        assert!(matches!(
            GroupedDistribution::new("x", 1, groups),
            Err(ModelError::BadWeights { .. })
        ));
        let groups = vec![Group::new(1.5, 10.0), Group::new(-0.5, 20.0)];
        assert!(matches!(
            GroupedDistribution::new("x", 1, groups),
            Err(ModelError::BadWeights { .. })
        ));
    }

    #[test]
    fn rejects_single_group() {
        assert!(matches!(
            GroupedDistribution::new("x", 1, vec![Group::new(1.0, 100.0)]),
            Err(ModelError::TooFewGroups { count: 1 })
        ));
        assert!(matches!(
            GroupedDistribution::new("x", 1, vec![]),
            Err(ModelError::TooFewGroups { count: 0 })
        ));
    }

    #[test]
    fn sorts_ascending_and_is_idempotent() {
        let d = GroupedDistribution::new("x", 1, quintiles([51.9, 3.1, 22.7, 8.3, 14.1])).unwrap();
        assert_eq!(d.shares(), vec![3.1, 8.3, 14.1, 22.7, 51.9]);
        let again = GroupedDistribution::new("x", 1, d.groups().to_vec()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn loose_tolerance_rescales_weights() {
        let w = 0.3333333;
        let groups = vec![Group::new(w, 1.0), Group::new(w, 2.0), Group::new(w, 3.0)];
        assert!(GroupedDistribution::new("x", 1, groups.clone()).is_err());
        let d = GroupedDistribution::with_weight_tolerance("x", 1, groups, 1e-6).unwrap();
        let sum: f64 = d.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_revalidates() {
        let d = GroupedDistribution::new("x", 7, quintiles([9.4, 14.0, 17.4, 22.3, 36.9])).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: GroupedDistribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);

        let bad =
            r#"{"label":"x","year":1,"groups":[{"population_weight":1.0,"income_share":5.0}]}"#;
        assert!(serde_json::from_str::<GroupedDistribution>(bad).is_err());
    }

    #[test]
    fn welfare_params_derivation() {
        let p = WelfareParams::from_critical_values(11.2, 37.3).unwrap();
        assert!((p.midpoint - 24.25).abs() < 1e-12);
        assert!((p.steepness * (p.high - p.low) - 6.0).abs() < 1e-12);
        assert!(WelfareParams::from_critical_values(20.0, 20.0).is_err());
        assert!(WelfareParams::from_critical_values(0.0, 20.0).is_err());
        assert!(WelfareParams::with_steepness(1.0, 2.0, 0.0).is_err());
        assert_eq!(
            WelfareParams::with_steepness(1.0, 3.0, 4.0)
                .unwrap()
                .midpoint,
            2.0
        );
    }
}
