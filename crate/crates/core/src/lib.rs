//! Finite-instance learners built on one-inclusion hypergraphs.
//!
//! The crate covers the whole pipeline for binary, multiclass, partial and
//! bounded-regression classes over finite domains:
//!
//! - [`classes`]: hypothesis classes, samples and brute-force dimensions
//!   (VC, DS, V_γ and P_γ).
//! - [`hypergraph`]: one-inclusion hypergraphs and their densities.
//! - [`orientation`]: max-flow orientations with bounded out-degree.
//! - [`predictors`]: the one-inclusion predictor and its partial and
//!   regression variants, suffix aggregation, ERM and leave-one-out audits.
//! - [`bounds`]: closed-form martingale and risk bound evaluators.
//! - [`harness`]: seeded finite-distribution simulations with exact risks.

pub mod bounds;
pub mod classes;
mod error;
pub mod harness;
pub mod hypergraph;
pub mod orientation;
pub mod predictors;

pub use error::{Error, Result};

/// Exact rational used for densities and real-valued labels.
pub type Rational = num_rational::Ratio<i64>;

/// Explicit limits for every exhaustive search in the crate.
///
/// Exceeding a limit is reported as [`Error::BudgetExceeded`]; nothing is
/// ever approximated silently.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    /// Largest domain for VC-dimension subset search.
    pub vc_domain: usize,
    /// Largest class (row count) accepted by any dimension search.
    pub max_rows: usize,
    /// Largest domain for the V_γ search.
    pub v_gamma_domain: usize,
    /// Largest domain for the P_γ (fat-shattering) search.
    pub fat_domain: usize,
    /// Largest number of candidate witness levels per point in the P_γ search.
    pub fat_grid: usize,
    /// Largest class for the DS-dimension subclass enumeration.
    pub ds_rows: usize,
    /// Largest domain for the DS-dimension search.
    pub ds_domain: usize,
    /// Largest vertex count for exhaustive maximum-density search.
    pub mu_vertices: usize,
    /// Largest domain for the class-density search over point subsets.
    pub density_domain: usize,
    /// Largest number of samples enumerated by exact expected-risk evaluation.
    pub expected_risk_samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            vc_domain: 16,
            max_rows: 1 << 16,
            v_gamma_domain: 10,
            fat_domain: 10,
            fat_grid: 64,
            ds_rows: 12,
            ds_domain: 5,
            mu_vertices: 20,
            density_domain: 16,
            expected_risk_samples: 1_000_000,
        }
    }
}
