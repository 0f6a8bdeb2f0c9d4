//! Welfare-maximizing ("feasible") income distributions for grouped income
//! data.
//!
//! Income is allocated over population subgroups by a Boltzmann distribution
//! `P_i ∝ exp(beta * E_i)` over income-distribution factors `E_i`. Total
//! welfare is a sum of sigmoid utilities, and the inverse temperature `beta*`
//! that maximizes it defines the optimal distribution. Its Lorenz curve and
//! Gini coefficient are compared against the actual ones.
//!
//! ```
//! use feq::{ingest, report};
//!
//! let usa = ingest::builtin("usa").unwrap();
//! let r = report::analyze(&usa, &report::AnalysisOptions::default()).unwrap();
//! assert_eq!(r.beta_reported, 0.017);
//! assert!(r.gini_optimal < r.gini_actual);
//! ```

pub mod allocation;
pub mod cli;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod optimizer;
pub mod report;
pub mod welfare;

pub use model::{
    BoltzmannAllocation, Group, GroupedDistribution, LorenzCurve, ModelError, OptimizationResult,
    WelfareParams,
};
