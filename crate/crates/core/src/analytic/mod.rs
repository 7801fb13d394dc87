//! Ground truth for distribution pairs: `θ`, `σ1²`, `σ2²`, `τ` and everything
//! derived from them (`σ_N²`, `s_N²`, placement covariances, expected
//! quadratic forms and the leading bias terms of competing estimators).
//!
//! The moment formulas are generic over the number type so that the same
//! code serves floating-point ground truth and the exact rational oracle.

mod quadrature;
mod spec;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

pub use quadrature::integrate;
pub use spec::{DistributionSpec, Kind, Marginal};

use crate::error::{Error, Result};

/// Absolute tolerance for ground-truth quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Poisson supports are truncated once the cumulative mass reaches
/// `1 − POISSON_TAIL`.
pub const POISSON_TAIL: f64 = 1e-12;

/// Population quantities of a distribution pair (F1, F2).
///
/// `sigma1_sq = Var F2(X1)`, `sigma2_sq = Var F1(X2)` with normalized
/// distribution functions, `tau = P(X1 = X2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<T = f64> {
    pub theta: T,
    pub sigma1_sq: T,
    pub sigma2_sq: T,
    pub tau: T,
}

fn lift<T: FromPrimitive>(n: usize) -> T {
    T::from_usize(n).expect("sample size representable")
}

impl<T> GroundTruth<T>
where
    T: Num + Clone + FromPrimitive,
{
    /// `θ(1 − θ) − τ/4`.
    fn tie_corrected_spread(&self) -> T {
        let four = lift::<T>(4);
        self.theta.clone() * (T::one() - self.theta.clone()) - self.tau.clone() / four
    }

    /// `θ(1 − θ) − σ1² − σ2²`, non-negative by van Dantzig's inequality.
    pub fn dantzig_gap(&self) -> T {
        self.theta.clone() * (T::one() - self.theta.clone())
            - self.sigma1_sq.clone()
            - self.sigma2_sq.clone()
    }

    /// `Var(θ̂) = [(n2 − 1)σ1² + (n1 − 1)σ2² + θ(1 − θ) − τ/4]/(n1n2)`.
    pub fn sigma_n_sq(&self, n1: usize, n2: usize) -> T {
        let (a, b) = (lift::<T>(n1), lift::<T>(n2));
        ((b.clone() - T::one()) * self.sigma1_sq.clone()
            + (a.clone() - T::one()) * self.sigma2_sq.clone()
            + self.tie_corrected_spread())
            / (a * b)
    }

    /// Asymptotic variance of `√N θ̂`: `N/(n1n2)·(n2σ1² + n1σ2²)`.
    pub fn s_n_sq(&self, n1: usize, n2: usize) -> T {
        let (a, b) = (lift::<T>(n1), lift::<T>(n2));
        (a.clone() + b.clone()) / (a.clone() * b.clone())
            * (b * self.sigma1_sq.clone() + a * self.sigma2_sq.clone())
    }

    /// Exact bias of the DeLong estimator:
    /// `[θ(1 − θ) − σ1² − σ2² − τ/4]/(n1n2)`.
    pub fn bias_dl(&self, n1: usize, n2: usize) -> T {
        let four = lift::<T>(4);
        (self.dantzig_gap() - self.tau.clone() / four) / (lift::<T>(n1) * lift::<T>(n2))
    }

    /// Leading term of the Perme-Manevski bias,
    /// `[2(θ(1 − θ) − σ1² − σ2²) − τ/4]/(n1n2)`; the `O(1/N)` remainder is
    /// not modelled.
    pub fn bias_pm(&self, n1: usize, n2: usize) -> T {
        let four = lift::<T>(4);
        let two = lift::<T>(2);
        (two * self.dantzig_gap() - self.tau.clone() / four) / (lift::<T>(n1) * lift::<T>(n2))
    }

    /// `Var(R*_11) = n2[(n2 − 1)σ1² + θ(1 − θ) − τ/4]`.
    pub fn placement_variance1(&self, n2: usize) -> T {
        let b = lift::<T>(n2);
        b.clone() * ((b - T::one()) * self.sigma1_sq.clone() + self.tie_corrected_spread())
    }

    /// `Cov(R*_11, R*_12) = n2σ2²`.
    pub fn placement_covariance1(&self, n2: usize) -> T {
        lift::<T>(n2) * self.sigma2_sq.clone()
    }

    /// `Var(R*_21) = n1[(n1 − 1)σ2² + θ(1 − θ) − τ/4]`.
    pub fn placement_variance2(&self, n1: usize) -> T {
        let a = lift::<T>(n1);
        a.clone() * ((a - T::one()) * self.sigma2_sq.clone() + self.tie_corrected_spread())
    }

    /// `Cov(R*_21, R*_22) = n1σ1²`.
    pub fn placement_covariance2(&self, n1: usize) -> T {
        lift::<T>(n1) * self.sigma1_sq.clone()
    }

    /// `E(Q1²) = (n1 − 1)n2[(n2 − 1)σ1² − σ2² + θ(1 − θ) − τ/4]`.
    pub fn expected_q1_sq(&self, n1: usize, n2: usize) -> T {
        let (a, b) = (lift::<T>(n1), lift::<T>(n2));
        (a - T::one())
            * b.clone()
            * ((b - T::one()) * self.sigma1_sq.clone() - self.sigma2_sq.clone()
                + self.tie_corrected_spread())
    }

    /// `E(Q2²) = (n2 − 1)n1[(n1 − 1)σ2² − σ1² + θ(1 − θ) − τ/4]`.
    pub fn expected_q2_sq(&self, n1: usize, n2: usize) -> T {
        let (a, b) = (lift::<T>(n1), lift::<T>(n2));
        (b - T::one())
            * a.clone()
            * ((a - T::one()) * self.sigma2_sq.clone() - self.sigma1_sq.clone()
                + self.tie_corrected_spread())
    }
}

impl GroundTruth<f64> {
    /// The largest possible `Var(θ̂)` for this `θ`: `θ(1 − θ)/min(n1, n2)`.
    pub fn birnbaum_klose_max(&self, n1: usize, n2: usize) -> f64 {
        self.theta * (1.0 - self.theta) / n1.min(n2) as f64
    }

    /// Checks van Dantzig, Birnbaum-Klose (at the given sizes) and the ranges
    /// of every component, allowing `slack` for numerical error.
    pub fn check_invariants(&self, n1: usize, n2: usize, slack: f64) -> Result<()> {
        let fail = |what: &str| Err(Error::InvariantViolation(format!("{what}: {self:?}")));
        if !(-slack..=1.0 + slack).contains(&self.theta) || !(-slack..=1.0 + slack).contains(&self.tau) {
            return fail("θ or τ outside [0, 1]");
        }
        if self.sigma1_sq < -slack || self.sigma2_sq < -slack {
            return fail("negative σ_i²");
        }
        if self.dantzig_gap() < -slack {
            return fail("van Dantzig inequality");
        }
        if self.sigma_n_sq(n1, n2) > self.birnbaum_klose_max(n1, n2) + slack {
            return fail("Birnbaum-Klose inequality");
        }
        Ok(())
    }
}

/// Ground truth of two discrete distributions given as value lists with
/// probabilities, using normalized distribution functions
/// `F = (F⁺ + F⁻)/2`. Values within each list must be distinct.
pub fn discrete_ground_truth<T>(
    values1: &[f64],
    probs1: &[T],
    values2: &[f64],
    probs2: &[T],
) -> GroundTruth<T>
where
    T: Num + Clone + FromPrimitive,
{
    let half = T::one() / lift::<T>(2);
    // Normalized CDF of (values, probs) at x.
    let cdf = |values: &[f64], probs: &[T], x: f64| -> T {
        values.iter().zip(probs).fold(T::zero(), |acc, (&v, p)| {
            if v < x {
                acc + p.clone()
            } else if v == x {
                acc + p.clone() * half.clone()
            } else {
                acc
            }
        })
    };
    let mut theta = T::zero();
    let mut f1_sq = T::zero();
    let mut tau = T::zero();
    for (&x, p2) in values2.iter().zip(probs2) {
        let f1 = cdf(values1, probs1, x);
        theta = theta + p2.clone() * f1.clone();
        f1_sq = f1_sq + p2.clone() * f1.clone() * f1;
        for (&y, p1) in values1.iter().zip(probs1) {
            if y == x {
                tau = tau + p1.clone() * p2.clone();
            }
        }
    }
    let mut f2_sq = T::zero();
    for (&x, p1) in values1.iter().zip(probs1) {
        let f2 = cdf(values2, probs2, x);
        f2_sq = f2_sq + p1.clone() * f2.clone() * f2;
    }
    let one_minus = T::one() - theta.clone();
    GroundTruth {
        sigma1_sq: f2_sq - one_minus.clone() * one_minus,
        sigma2_sq: f1_sq - theta.clone() * theta.clone(),
        theta,
        tau,
    }
}

/// Closed-form ground truth for exponential distributions with rates
/// `rate1` (group 1) and `rate2` (group 2).
pub fn exponential_closed_form(rate1: f64, rate2: f64) -> GroundTruth {
    let (l1, l2) = (rate1, rate2);
    let theta = l1 / (l1 + l2);
    // E[F1(X2)²] and E[F2(X1)²]
    let f1_sq = 1.0 - 2.0 * l2 / (l1 + l2) + l2 / (2.0 * l1 + l2);
    let f2_sq = 1.0 - 2.0 * l1 / (l1 + l2) + l1 / (l1 + 2.0 * l2);
    GroundTruth {
        theta,
        sigma1_sq: f2_sq - (1.0 - theta).powi(2),
        sigma2_sq: f1_sq - theta * theta,
        tau: 0.0,
    }
}

/// Closed-form ground truth of the maximal-variance pair: `σ1² = θ(1 − θ)`,
/// `σ2² = 0`, `τ = 0`.
pub fn dmax_closed_form(theta: f64) -> GroundTruth {
    GroundTruth {
        theta,
        sigma1_sq: theta * (1.0 - theta),
        sigma2_sq: 0.0,
        tau: 0.0,
    }
}

/// Ground truth of a spec, by exact sums (discrete) or quadrature
/// (continuous).
pub fn ground_truth(spec: &DistributionSpec) -> Result<GroundTruth> {
    spec.ground_truth()
}

/// The DeLong bias of a spec at the given sample sizes.
pub fn bias_dl(spec: &DistributionSpec, n1: usize, n2: usize) -> Result<f64> {
    Ok(spec.ground_truth()?.bias_dl(n1, n2))
}

/// Leading term of the Perme-Manevski bias of a spec.
pub fn bias_pm(spec: &DistributionSpec, n1: usize, n2: usize) -> Result<f64> {
    Ok(spec.ground_truth()?.bias_pm(n1, n2))
}

/// Returns the maximal-variance distribution pair for `theta`.
pub fn dmax_spec(theta: f64) -> Result<DistributionSpec> {
    DistributionSpec::dmax(theta)
}

/// Returns the 5-point ordinal pair obtained by discretizing
/// `Beta(a1, b1)` and `Beta(a2, b2)`.
pub fn ordinal5_spec(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<DistributionSpec> {
    DistributionSpec::ordinal5(a1, b1, a2, b2)
}
