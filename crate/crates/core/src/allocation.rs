//! Boltzmann (softmax) allocation of total income over income-distribution
//! factors.

use thiserror::Error;

use crate::model::{BoltzmannAllocation, GroupedDistribution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error("beta must be non-negative and finite, got {0}")]
    NegativeBeta(f64),
    #[error("no factors supplied")]
    EmptyFactors,
    #[error("non-finite factor at index {0}")]
    NonFiniteFactor(usize),
    #[error("expected {expected} factors, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Source of the income-distribution factors.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FactorModel {
    /// Factors equal to the representative incomes (proportionality constant
    /// one; any other constant is absorbed into beta).
    #[default]
    ProportionalToIncome,
    Explicit(Vec<f64>),
}

pub fn income_factors(
    dist: &GroupedDistribution,
    model: &FactorModel,
) -> Result<Vec<f64>, AllocationError> {
    match model {
        FactorModel::ProportionalToIncome => Ok(dist.representative_incomes()),
        FactorModel::Explicit(factors) => {
            if factors.len() != dist.len() {
                return Err(AllocationError::LengthMismatch {
                    expected: dist.len(),
                    actual: factors.len(),
                });
            }
            Ok(factors.clone())
        }
    }
}

/// `P_i = exp(beta * E_i) / sum_j exp(beta * E_j)`, computed with the largest
/// factor subtracted from every exponent.
pub fn boltzmann_probabilities(factors: &[f64], beta: f64) -> Result<Vec<f64>, AllocationError> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(AllocationError::NegativeBeta(beta));
    }
    if factors.is_empty() {
        return Err(AllocationError::EmptyFactors);
    }
    if let Some(i) = factors.iter().position(|f| !f.is_finite()) {
        return Err(AllocationError::NonFiniteFactor(i));
    }
    let max = factors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = factors.iter().map(|&e| (beta * (e - max)).exp()).collect();
    let norm: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / norm).collect())
}

/// `y_i = Y * P_i` with `Y` the distribution's total income.
pub fn allocate_income(
    dist: &GroupedDistribution,
    factors: &[f64],
    beta: f64,
) -> Result<BoltzmannAllocation, AllocationError> {
    if factors.len() != dist.len() {
        return Err(AllocationError::LengthMismatch {
            expected: dist.len(),
            actual: factors.len(),
        });
    }
    let probabilities = boltzmann_probabilities(factors, beta)?;
    let total = dist.total_income();
    let incomes = probabilities.iter().map(|p| total * p).collect();
    Ok(BoltzmannAllocation {
        beta,
        probabilities,
        incomes,
        factors: factors.to_vec(),
    })
}
