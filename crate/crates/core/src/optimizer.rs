//! Search for the inverse temperature that maximizes total social welfare.
//!
//! The welfare curve `W(beta)` is scanned on a uniform grid, the best grid
//! cell is refined by golden-section search, and the first-order condition
//! `dW/dbeta = 0` is checked afterwards with a central difference.

use thiserror::Error;

use crate::allocation::{allocate_income, AllocationError};
use crate::model::{GroupedDistribution, OptimizationResult, WelfareParams};
use crate::welfare::{total_welfare, WelfareError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("invalid search configuration: {0}")]
    BadConfig(String),
    #[error(
        "welfare is maximized at beta = {beta}, within one grid step of beta_max = {beta_max}; widen the search interval"
    )]
    BoundaryMaximum { beta: f64, beta_max: f64 },
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Welfare(#[from] WelfareError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub beta_min: f64,
    pub beta_max: f64,
    pub grid_points: usize,
    /// Width of the final golden-section bracket.
    pub refine_tolerance: f64,
    /// Step `h` of the central difference at the optimum.
    pub derivative_step: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            beta_min: 0.0,
            beta_max: 1.0,
            grid_points: 2001,
            refine_tolerance: 1e-6,
            derivative_step: 1e-4,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |m: &str| Err(OptimizeError::BadConfig(m.to_string()));
        if !(self.beta_min.is_finite() && self.beta_max.is_finite()) {
            return bad("beta bounds must be finite");
        }
        if self.beta_min < 0.0 {
            return bad("beta_min must be non-negative");
        }
        if self.beta_min >= self.beta_max {
            return bad("beta_min must be below beta_max");
        }
        if self.grid_points < 3 {
            return bad("grid_points must be at least 3");
        }
        if !(self.refine_tolerance > 0.0 && self.derivative_step > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    pub fn grid_step(&self) -> f64 {
        (self.beta_max - self.beta_min) / (self.grid_points - 1) as f64
    }

    /// Grid point `k`; the last point is exactly `beta_max`.
    pub fn grid_beta(&self, k: usize) -> f64 {
        if k + 1 == self.grid_points {
            self.beta_max
        } else {
            self.beta_min + k as f64 * self.grid_step()
        }
    }
}

/// Total welfare of the Boltzmann allocation at `beta`.
pub fn welfare_of_beta(
    dist: &GroupedDistribution,
    params: &WelfareParams,
    factors: &[f64],
    beta: f64,
) -> Result<f64, OptimizeError> {
    let allocation = allocate_income(dist, factors, beta)?;
    Ok(total_welfare(&allocation.incomes, &dist.weights(), params)?)
}

pub fn sweep_welfare(
    dist: &GroupedDistribution,
    params: &WelfareParams,
    factors: &[f64],
    config: &SearchConfig,
) -> Result<Vec<(f64, f64)>, OptimizeError> {
    config.validate()?;
    (0..config.grid_points)
        .map(|k| {
            let beta = config.grid_beta(k);
            welfare_of_beta(dist, params, factors, beta).map(|w| (beta, w))
        })
        .collect()
}

pub fn maximize_welfare(
    dist: &GroupedDistribution,
    params: &WelfareParams,
    factors: &[f64],
    config: &SearchConfig,
) -> Result<OptimizationResult, OptimizeError> {
    let sweep = sweep_welfare(dist, params, factors, config)?;

    // first strict improvement wins, so ties resolve to the smallest beta
    let mut best = 0;
    for (k, &(_, w)) in sweep.iter().enumerate() {
        if w > sweep[best].1 {
            best = k;
        }
    }

    let lo = sweep[best.saturating_sub(1)].0;
    let hi = sweep[(best + 1).min(sweep.len() - 1)].0;
    let objective = |b: f64| welfare_of_beta(dist, params, factors, b);
    let (refined_beta, refined_welfare) =
        golden_section_max(objective, lo, hi, config.refine_tolerance)?;

    let (beta_star, welfare_star) = if refined_welfare > sweep[best].1 {
        (refined_beta, refined_welfare)
    } else {
        sweep[best]
    };

    if config.beta_max - beta_star < config.grid_step() {
        return Err(OptimizeError::BoundaryMaximum {
            beta: beta_star,
            beta_max: config.beta_max,
        });
    }

    let derivative_at_star =
        derivative_check(dist, params, factors, beta_star, config.derivative_step)?;
    let optimal_allocation = allocate_income(dist, factors, beta_star)?;

    Ok(OptimizationResult {
        beta_star,
        welfare_star,
        optimal_allocation,
        sweep,
        derivative_at_star,
    })
}

/// Central difference `(W(b+h) - W(b-h)) / 2h`. Near `beta = 0` the lower
/// point is clamped to zero and the quotient uses the actual span.
pub fn derivative_check(
    dist: &GroupedDistribution,
    params: &WelfareParams,
    factors: &[f64],
    beta: f64,
    step: f64,
) -> Result<f64, OptimizeError> {
    let lo = (beta - step).max(0.0);
    let hi = beta + step;
    let w_lo = welfare_of_beta(dist, params, factors, lo)?;
    let w_hi = welfare_of_beta(dist, params, factors, hi)?;
    Ok((w_hi - w_lo) / (hi - lo))
}

/// `(W(b+h) - 2W(b) + W(b-h)) / h^2`; negative at a strict local maximum.
pub fn second_difference(
    dist: &GroupedDistribution,
    params: &WelfareParams,
    factors: &[f64],
    beta: f64,
    step: f64,
) -> Result<f64, OptimizeError> {
    if beta - step < 0.0 {
        return Err(AllocationError::NegativeBeta(beta - step).into());
    }
    let w = |b| welfare_of_beta(dist, params, factors, b);
    Ok((w(beta + step)? - 2.0 * w(beta)? + w(beta - step)?) / (step * step))
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`. Returns the
/// best point evaluated, which always lies inside the bracket.
fn golden_section_max<F, E>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64), E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
