//! Rank- and placement-based estimation of the variance of the Mann-Whitney
//! effect estimator `θ̂ = P̂(X1 < X2) + ½P̂(X1 = X2)`, valid with and without
//! ties.
//!
//! The crate is organised bottom-up:
//!
//! - [`rank_core`]: counting statistic, mid/min/max ranks and placements.
//! - [`estimators`]: `θ̂`, `τ̂_N`, the quadratic forms of the placements and
//!   the unbiased variance estimator together with its competitors.
//! - [`analytic`]: distribution pairs with samplers and exact ground truth.
//! - [`oracle`]: brute-force reference implementations and exact
//!   enumeration in rational arithmetic.
//! - [`simulation`]: reproducible Monte-Carlo experiments emitting CSV.

pub mod analytic;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod rank_core;
pub mod simulation;

pub use analytic::{DistributionSpec, GroundTruth};
pub use error::{Error, Result};
pub use estimators::{
    analyze, sigma_dl_sq, sigma_hm_sq, sigma_n_sq, sigma_pm_sq, sigma_shs_sq, tau_hat, theta_hat,
    wald_ci, Analysis, CountSums, EffectSummary, Estimator, VarianceEstimates,
};
pub use rank_core::{count, count_minus, count_plus, rank_tables, GroupRanks, RankTables, TwoSample};
