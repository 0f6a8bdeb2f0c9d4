//! End-to-end analysis of one distribution and its text, JSON and CSV
//! renderings.
//!
//! Machine-readable output keeps full precision (shortest round-trip float
//! formatting). Text tables round shares to one decimal, Gini to two and
//! beta to three.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::allocation::{allocate_income, income_factors, AllocationError, FactorModel};
use crate::metrics::{
    compare_distributions, gini, lorenz_of_allocation, lorenz_of_distribution, MetricsError,
};
use crate::model::{GroupedDistribution, LorenzCurve, WelfareParams};
use crate::optimizer::{maximize_welfare, OptimizeError, SearchConfig};
use crate::welfare::{derive_welfare_params, WelfareDerivationRule, WelfareError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Welfare(#[from] WelfareError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl AnalysisError {
    pub fn is_boundary(&self) -> bool {
        matches!(
            self,
            AnalysisError::Optimize(OptimizeError::BoundaryMaximum { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub rule: WelfareDerivationRule,
    pub factors: FactorModel,
    pub search: SearchConfig,
    /// Decimal places beta* is rounded to before the optimal distribution is
    /// evaluated. `None` uses the unrounded optimum.
    pub beta_decimals: Option<u32>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            rule: WelfareDerivationRule::QuintileDefault,
            factors: FactorModel::ProportionalToIncome,
            search: SearchConfig::default(),
            beta_decimals: Some(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub label: String,
    pub year: i32,
    pub welfare_params: WelfareParams,
    /// Unrounded welfare-maximizing beta.
    pub beta_star: f64,
    /// Beta the optimal distribution below was evaluated at.
    pub beta_reported: f64,
    pub welfare_star: f64,
    pub derivative_at_star: f64,
    pub actual_shares: Vec<f64>,
    pub optimal_shares: Vec<f64>,
    pub differences: Vec<f64>,
    pub gini_actual: f64,
    pub gini_optimal: f64,
    pub lorenz_actual: LorenzCurve,
    pub lorenz_optimal: LorenzCurve,
    pub sweep: Vec<(f64, f64)>,
}

pub fn round_beta(beta: f64, decimals: Option<u32>) -> f64 {
    match decimals {
        Some(d) => {
            let scale = 10f64.powi(d as i32);
            (beta * scale).round() / scale
        }
        None => beta,
    }
}

pub fn analyze(
    dist: &GroupedDistribution,
    options: &AnalysisOptions,
) -> Result<AnalysisReport, AnalysisError> {
    let params = derive_welfare_params(dist, options.rule)?;
    let factors = income_factors(dist, &options.factors)?;
    let result = maximize_welfare(dist, &params, &factors, &options.search)?;

    let beta_reported = round_beta(result.beta_star, options.beta_decimals);
    let optimal = if beta_reported == result.beta_star {
        result.optimal_allocation.clone()
    } else {
        allocate_income(dist, &factors, beta_reported)?
    };
    let comparison = compare_distributions(dist, &optimal)?;
    let lorenz_actual = lorenz_of_distribution(dist)?;
    let lorenz_optimal = lorenz_of_allocation(dist, &optimal)?;
    debug_assert_eq!(gini(&lorenz_optimal), comparison.gini_optimal);

    Ok(AnalysisReport {
        label: dist.label().to_string(),
        year: dist.year(),
        welfare_params: params,
        beta_star: result.beta_star,
        beta_reported,
        welfare_star: result.welfare_star,
        derivative_at_star: result.derivative_at_star,
        actual_shares: comparison.rows.iter().map(|r| r.actual_share).collect(),
        optimal_shares: comparison.rows.iter().map(|r| r.optimal_share).collect(),
        differences: comparison.rows.iter().map(|r| r.difference).collect(),
        gini_actual: comparison.gini_actual,
        gini_optimal: comparison.gini_optimal,
        lorenz_actual,
        lorenz_optimal,
        sweep: result.sweep,
    })
}

const QUINTILE_NAMES: [&str; 5] = ["Lowest", "Second", "Third", "Fourth", "Highest"];

/// Table of actual, optimal and difference rows with Gini values.
pub fn render_text(report: &AnalysisReport) -> String {
    let k = report.actual_shares.len();
    let names: Vec<String> = if k == 5 {
        QUINTILE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        (1..=k).map(|i| format!("G{i}")).collect()
    };
    let p = &report.welfare_params;
    let optimal_label = format!("Optimal (beta* = {:.3})", report.beta_reported);
    let first = optimal_label.len().max("Difference".len());

    let mut out = String::new();
    let _ = writeln!(out, "{} ({})", report.label, report.year);
    let _ = writeln!(
        out,
        "L = {:.2}  H = {:.2}  mu = {:.2}  alpha = {:.2}",
        p.low, p.high, p.midpoint, p.steepness
    );
    let _ = write!(out, "{:<first$}", "Income");
    for n in &names {
        let _ = write!(out, " {n:>8}");
    }
    let _ = writeln!(out, " {:>6}", "Gini");

    let mut row = |title: &str, values: &[f64], g: f64| {
        let _ = write!(out, "{title:<first$}");
        for v in values {
            let _ = write!(out, " {:>8}", format!("{:.1}", v));
        }
        let _ = writeln!(out, " {:>6}", format!("{g:.2}"));
    };
    row("Actual", &report.actual_shares, report.gini_actual);
    row(&optimal_label, &report.optimal_shares, report.gini_optimal);
    row(
        "Difference",
        &report.differences,
        report.gini_actual - report.gini_optimal,
    );
    out
}

pub fn emit_json(reports: &[AnalysisReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

pub const SWEEP_HEADER: &str = "beta,welfare";
pub const LORENZ_HEADER: &str = "which,cum_population,cum_income";
pub const TREND_HEADER: &str = "year,gini_actual,gini_optimal,beta_star";

pub fn emit_sweep_csv(sweep: &[(f64, f64)]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for (b, w) in sweep {
        let _ = writeln!(out, "{b},{w}");
    }
    out
}

/// Actual and optimal breakpoints plus the diagonal at the same population
/// coordinates as the actual curve.
pub fn emit_lorenz_csv(actual: &LorenzCurve, optimal: &LorenzCurve) -> String {
    let mut out = format!("{LORENZ_HEADER}\n");
    for (x, y) in &actual.points {
        let _ = writeln!(out, "actual,{x},{y}");
    }
    for (x, y) in &optimal.points {
        let _ = writeln!(out, "optimal,{x},{y}");
    }
    for (x, _) in &actual.points {
        let _ = writeln!(out, "diagonal,{x},{x}");
    }
    out
}

pub fn emit_trend_csv(reports: &[AnalysisReport]) -> String {
    let mut out = format!("{TREND_HEADER}\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.year, r.gini_actual, r.gini_optimal, r.beta_star
        );
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("expected header `{expected}`")]
    Header { expected: &'static str },
    #[error("line {0}: malformed row")]
    Row(usize),
}

fn data_rows<'a>(
    text: &'a str,
    header: &'static str,
    width: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => {}
        _ => return Err(CsvError::Header { expected: header }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.trim_end().split(',').collect();
            if fields.len() == width {
                Ok((i + 1, fields))
            } else {
                Err(CsvError::Row(i + 1))
            }
        })
        .collect()
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<(f64, f64)>, CsvError> {
    data_rows(text, SWEEP_HEADER, 2)?
        .into_iter()
        .map(|(line, f)| match (f[0].parse(), f[1].parse()) {
            (Ok(b), Ok(w)) => Ok((b, w)),
            _ => Err(CsvError::Row(line)),
        })
        .collect()
}

/// Returns `(actual, optimal, diagonal)` curves.
pub fn parse_lorenz_csv(text: &str) -> Result<(LorenzCurve, LorenzCurve, LorenzCurve), CsvError> {
    let mut curves = [Vec::new(), Vec::new(), Vec::new()];
    for (line, f) in data_rows(text, LORENZ_HEADER, 3)? {
        let slot = match f[0] {
            "actual" => 0,
            "optimal" => 1,
            "diagonal" => 2,
            _ => return Err(CsvError::Row(line)),
        };
        match (f[1].parse(), f[2].parse()) {
            (Ok(x), Ok(y)) => curves[slot].push((x, y)),
            _ => return Err(CsvError::Row(line)),
        }
    }
    let [a, o, d] = curves;
    Ok((
        LorenzCurve { points: a },
        LorenzCurve { points: o },
        LorenzCurve { points: d },
    ))
}
