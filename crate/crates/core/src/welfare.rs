//! Sigmoid individual welfare and total social welfare.

use thiserror::Error;

use crate::model::{GroupedDistribution, ModelError, WelfareParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WelfareError {
    #[error("quintile rule needs exactly 5 equal-weight groups ({0}); supply explicit L and H")]
    RuleMismatch(String),
    #[error(transparent)]
    DegenerateWidth(#[from] ModelError),
    #[error("length mismatch: {incomes} incomes vs {weights} weights")]
    LengthMismatch { incomes: usize, weights: usize },
}

/// How the critical low/high incomes are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum WelfareDerivationRule {
    /// `L` midway between the 2nd and 3rd quintile shares, `H` midway between
    /// the 4th and 5th.
    #[default]
    QuintileDefault,
    Explicit {
        low: f64,
        high: f64,
    },
}

pub fn derive_welfare_params(
    dist: &GroupedDistribution,
    rule: WelfareDerivationRule,
) -> Result<WelfareParams, WelfareError> {
    let (low, high) = match rule {
        WelfareDerivationRule::QuintileDefault => {
            if dist.len() != 5 {
                return Err(WelfareError::RuleMismatch(format!(
                    "got {} groups",
                    dist.len()
                )));
            }
            if !dist.has_equal_weights() {
                return Err(WelfareError::RuleMismatch("weights are unequal".into()));
            }
            let s = dist.shares();
            ((s[1] + s[2]) / 2.0, (s[3] + s[4]) / 2.0)
        }
        WelfareDerivationRule::Explicit { low, high } => (low, high),
    };
    Ok(WelfareParams::from_critical_values(low, high)?)
}

/// `U(y) = 1 / (1 + exp(alpha * (mu - y)))`, evaluated without overflow.
pub fn sigmoid_utility(income: f64, params: &WelfareParams) -> f64 {
    let z = params.steepness * (params.midpoint - income);
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// dU/dy = alpha * U * (1 - U).
pub fn marginal_utility(income: f64, params: &WelfareParams) -> f64 {
    let u = sigmoid_utility(income, params);
    params.steepness * u * (1.0 - u)
}

/// Sum of individual welfare, one term per smallest-weight subgroup.
///
/// Each group contributes `(weight / min_weight) * U(income)`, so equal
/// weights give one plain `U` term per group.
pub fn total_welfare(
    incomes: &[f64],
    weights: &[f64],
    params: &WelfareParams,
) -> Result<f64, WelfareError> {
    if incomes.len() != weights.len() {
        return Err(WelfareError::LengthMismatch {
            incomes: incomes.len(),
            weights: weights.len(),
        });
    }
    let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(incomes
        .iter()
        .zip(weights)
        .map(|(&y, &w)| (w / min_weight) * sigmoid_utility(y, params))
        .sum())
}
