//! Exact expectations of the estimators under finite distributions, by
//! enumerating every outcome in rational arithmetic.
//!
//! Observations within a group are exchangeable, so outcomes are enumerated
//! as pairs of multisets weighted by their multinomial probabilities rather
//! than as ordered tuples.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::brute::{brute_stats, BruteStats};
use crate::analytic::{discrete_ground_truth, GroundTruth};
use crate::error::{Error, Result};
use crate::estimators::Estimator;

/// Default cap on the number of enumerated multiset pairs.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// A finite distribution with exact rational probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    values: Vec<f64>,
    probs: Vec<BigRational>,
}

impl FiniteDist {
    /// Values must be finite and strictly increasing; probabilities positive
    /// and summing to exactly one.
    pub fn new(values: Vec<f64>, probs: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidParameter("support and probabilities must match and be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("support must be finite and strictly increasing".into()));
        }
        if probs.iter().any(|p| !p.is_positive()) {
            return Err(Error::InvalidParameter("probabilities must be positive".into()));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { values, probs })
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_fractions(values: &[f64], fractions: &[(i64, i64)]) -> Result<Self> {
        let probs = fractions
            .iter()
            .map(|&(p, q)| {
                if q == 0 {
                    Err(Error::InvalidParameter("zero denominator".into()))
                } else {
                    Ok(BigRational::new(p.into(), q.into()))
                }
            })
            .collect::<Result<_>>()?;
        Self::new(values.to_vec(), probs)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistPair {
    pub first: FiniteDist,
    pub second: FiniteDist,
}

impl FiniteDistPair {
    pub fn new(first: FiniteDist, second: FiniteDist) -> Self {
        Self { first, second }
    }

    /// `θ`, `σ1²`, `σ2²` and `τ` as exact rationals.
    pub fn ground_truth(&self) -> GroundTruth<BigRational> {
        discrete_ground_truth(self.first.values(), self.first.probs(), self.second.values(), self.second.probs())
    }
}

/// Names accepted by [`fixture`].
pub const FIXTURES: [&str; 7] = [
    "bernoulli_half",
    "bernoulli_skewed",
    "three_point",
    "three_point_shifted",
    "ordinal_overlap",
    "single_point",
    "disjoint",
];

/// Built-in distribution pairs with rational probabilities.
pub fn fixture(name: &str) -> Result<FiniteDistPair> {
    let d = FiniteDist::from_fractions;
    let (first, second) = match name {
        "bernoulli_half" => (d(&[0.0, 1.0], &[(1, 2), (1, 2)])?, d(&[0.0, 1.0], &[(1, 2), (1, 2)])?),
        "bernoulli_skewed" => (d(&[0.0, 1.0], &[(3, 4), (1, 4)])?, d(&[0.0, 1.0], &[(1, 3), (2, 3)])?),
        "three_point" => (
            d(&[0.0, 1.0, 2.0], &[(1, 2), (1, 4), (1, 4)])?,
            d(&[0.0, 1.0, 2.0], &[(1, 4), (1, 4), (1, 2)])?,
        ),
        "three_point_shifted" => (
            d(&[0.0, 1.0, 2.0], &[(1, 3), (1, 3), (1, 3)])?,
            d(&[1.0, 2.0, 3.0], &[(1, 6), (1, 2), (1, 3)])?,
        ),
        "ordinal_overlap" => (
            d(&[1.0, 2.0, 3.0], &[(2, 5), (2, 5), (1, 5)])?,
            d(&[2.0, 3.0, 4.0], &[(1, 5), (3, 10), (1, 2)])?,
        ),
        "single_point" => (d(&[0.0], &[(1, 1)])?, d(&[0.0], &[(1, 1)])?),
        "disjoint" => (d(&[0.0, 1.0], &[(1, 2), (1, 2)])?, d(&[2.0, 3.0], &[(1, 2), (1, 2)])?),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown fixture {other:?}; expected one of {}",
                FIXTURES.join(", ")
            )))
        }
    };
    Ok(FiniteDistPair::new(first, second))
}

/// Exact `E(σ̂_N²)` next to the exact `σ_N²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactExpectation {
    pub expected_sigma_n_sq: BigRational,
    pub sigma_n_sq_true: BigRational,
    pub n1: usize,
    pub n2: usize,
}

impl ExactExpectation {
    pub fn holds(&self) -> bool {
        self.expected_sigma_n_sq == self.sigma_n_sq_true
    }
}

/// Everything one enumeration produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub n1: usize,
    pub n2: usize,
    /// Exact expectations, in the order of [`Estimator::ALL`].
    pub expectations: Vec<BigRational>,
    pub truth: GroundTruth<BigRational>,
    pub sigma_n_sq_true: BigRational,
    /// Number of multiset pairs visited.
    pub outcomes: u128,
    /// Total probability of the visited outcomes; exactly one.
    pub total_probability: BigRational,
    /// Outcomes where `A + B + C + D = E²`, `A = E − F/4` or
    /// `σ̂_N² = θ̂² − D/d_N` failed in exact arithmetic.
    pub identity_failures: usize,
}

impl Enumeration {
    pub fn expectation(&self, estimator: Estimator) -> &BigRational {
        let idx = Estimator::ALL.iter().position(|e| *e == estimator).expect("listed estimator");
        &self.expectations[idx]
    }

    pub fn bias(&self, estimator: Estimator) -> BigRational {
        self.expectation(estimator) - &self.sigma_n_sq_true
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of multisets of size `n` over `s` values.
fn multiset_count(s: usize, n: usize) -> u128 {
    binomial((n + s - 1) as u128, (s - 1) as u128)
}

/// All count vectors `(k_1, …, k_s)` with `Σ k_i = n`.
fn compositions(s: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(s: usize, n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if s == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=n).rev() {
            prefix.push(k);
            rec(s - 1, n - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(s, n, &mut Vec::with_capacity(s), &mut out);
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// The sample and multinomial probability of each multiset of size `n`.
fn weighted_multisets(dist: &FiniteDist, n: usize) -> Vec<(Vec<f64>, BigRational)> {
    compositions(dist.values.len(), n)
        .into_iter()
        .map(|counts| {
            let mut sample = Vec::with_capacity(n);
            let mut weight = BigRational::from_integer(factorial(n));
            for ((&k, &v), p) in counts.iter().zip(&dist.values).zip(&dist.probs) {
                sample.extend(std::iter::repeat(v).take(k));
                weight = weight / BigRational::from_integer(factorial(k)) * num_traits::pow(p.clone(), k);
            }
            (sample, weight)
        })
        .collect()
}

fn identities_hold(s: &BruteStats<BigRational>) -> bool {
    let four = BigRational::from_integer(4.into());
    let (n1, n2) = (s.n1 as i64, s.n2 as i64);
    let d_n = BigRational::from_integer((n1 * (n1 - 1) * n2 * (n2 - 1)).into());
    &s.a + &s.b + &s.c + &s.d == &s.e * &s.e
        && s.a == &s.e - &s.f / four
        && s.sigma_n_sq == &s.theta_hat * &s.theta_hat - &s.d / d_n
}

struct Partial {
    sums: Vec<BigRational>,
    probability: BigRational,
    failures: usize,
}

/// Enumerates all outcomes of samples of sizes `n1`, `n2` from `dist`.
pub fn enumerate(dist: &FiniteDistPair, n1: usize, n2: usize, budget: u128) -> Result<Enumeration> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::InsufficientSampleSize { group: if n1 < 2 { 1 } else { 2 }, n: n1.min(n2), required: 2 });
    }
    let needed = multiset_count(dist.first.values.len(), n1).saturating_mul(multiset_count(dist.second.values.len(), n2));
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let outer = weighted_multisets(&dist.first, n1);
    let inner = weighted_multisets(&dist.second, n2);

    let partials: Vec<Partial> = outer
        .par_iter()
        .map(|(g1, w1)| -> Result<Partial> {
            let mut part = Partial {
                sums: vec![BigRational::zero(); Estimator::ALL.len()],
                probability: BigRational::zero(),
                failures: 0,
            };
            for (g2, w2) in &inner {
                let w = w1 * w2;
                let s = brute_stats::<BigRational>(g1, g2)?;
                if !identities_hold(&s) {
                    part.failures += 1;
                }
                let values = [&s.sigma_n_sq, &s.sigma_shs_sq, &s.sigma_dl_sq, &s.sigma_pm_sq, &s.sigma_hm_sq];
                for (acc, v) in part.sums.iter_mut().zip(values) {
                    *acc += &w * v;
                }
                part.probability += w;
            }
            Ok(part)
        })
        .collect::<Result<_>>()?;

    // ordered reduction
    let mut expectations = vec![BigRational::zero(); Estimator::ALL.len()];
    let mut total_probability = BigRational::zero();
    let mut identity_failures = 0;
    for part in partials {
        for (acc, v) in expectations.iter_mut().zip(part.sums) {
            *acc += v;
        }
        total_probability += part.probability;
        identity_failures += part.failures;
    }

    let truth = dist.ground_truth();
    let sigma_n_sq_true = truth.sigma_n_sq(n1, n2);
    Ok(Enumeration {
        n1,
        n2,
        expectations,
        truth,
        sigma_n_sq_true,
        outcomes: needed,
        total_probability,
        identity_failures,
    })
}

/// `E(σ̂_N²)` and `σ_N²` in exact arithmetic, with the default budget.
pub fn exact_unbiasedness(dist: &FiniteDistPair, n1: usize, n2: usize) -> Result<ExactExpectation> {
    exact_unbiasedness_with_budget(dist, n1, n2, DEFAULT_BUDGET)
}

pub fn exact_unbiasedness_with_budget(
    dist: &FiniteDistPair,
    n1: usize,
    n2: usize,
    budget: u128,
) -> Result<ExactExpectation> {
    let e = enumerate(dist, n1, n2, budget)?;
    Ok(ExactExpectation {
        expected_sigma_n_sq: e.expectation(Estimator::Unbiased).clone(),
        sigma_n_sq_true: e.sigma_n_sq_true,
        n1,
        n2,
    })
}

/// `E(estimator) − σ_N²` in exact arithmetic, with the default budget.
pub fn exact_bias(dist: &FiniteDistPair, n1: usize, n2: usize, estimator: Estimator) -> Result<BigRational> {
    Ok(enumerate(dist, n1, n2, DEFAULT_BUDGET)?.bias(estimator))
}

/// Decimal expansion of `x` with `digits` fractional digits, followed by
/// `...` when truncated.
pub fn decimal_string(x: &BigRational, digits: usize) -> String {
    let negative = x.is_negative();
    let x = x.abs();
    let int = x.to_integer();
    let den = x.denom().clone();
    let mut rem = x.numer() - &int * &den;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if !rem.is_zero() {
        out.push('.');
        let ten = BigInt::from(10);
        for _ in 0..digits {
            if rem.is_zero() {
                break;
            }
            rem *= &ten;
            let digit = &rem / &den;
            out.push_str(&digit.to_string());
            rem -= digit * &den;
        }
        if !rem.is_zero() {
            out.push_str("...");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn bernoulli_pair_unbiased() {
        let r = exact_unbiasedness(&fixture("bernoulli_half").unwrap(), 2, 2).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.sigma_n_sq_true.is_positive());
    }

    #[test]
    fn single_point_is_zero() {
        let r = exact_unbiasedness(&fixture("single_point").unwrap(), 3, 2).unwrap();
        assert!(r.expected_sigma_n_sq.is_zero());
        assert!(r.sigma_n_sq_true.is_zero());
    }

    #[test]
    fn three_point_unbiased() {
        let e = enumerate(&fixture("three_point").unwrap(), 3, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(e.outcomes, 100);
        assert!(e.total_probability.is_one());
        assert_eq!(e.identity_failures, 0);
        assert_eq!(e.bias(Estimator::Unbiased), BigRational::zero());
    }

    #[test]
    fn delong_bias_closed_form() {
        let dist = fixture("bernoulli_half").unwrap();
        let bias = exact_bias(&dist, 2, 2, Estimator::DeLong).unwrap();
        assert_eq!(bias, dist.ground_truth().bias_dl(2, 2));
    }

    #[test]
    fn shs_negative_under_ties() {
        let bias = exact_bias(&fixture("three_point").unwrap(), 3, 3, Estimator::Shs).unwrap();
        assert!(bias.is_negative());
    }

    #[test]
    fn budget_enforced() {
        let err = enumerate(&fixture("three_point").unwrap(), 3, 3, 99).unwrap_err();
        assert_eq!(err, Error::BudgetExceeded { needed: 100, budget: 99 });
    }

    #[test]
    fn fixtures_validate() {
        for name in FIXTURES {
            fixture(name).unwrap();
        }
        assert!(fixture("nope").is_err());
        assert!(FiniteDist::from_fractions(&[0.0, 1.0], &[(1, 2), (1, 3)]).is_err());
        assert!(FiniteDist::from_fractions(&[1.0, 0.0], &[(1, 2), (1, 2)]).is_err());
        assert!(FiniteDist::from_fractions(&[0.0, 1.0], &[(1, 1), (0, 1)]).is_err());
    }

    #[test]
    fn multisets_cover_probability() {
        let d = fixture("three_point").unwrap().first;
        let ms = weighted_multisets(&d, 4);
        assert_eq!(ms.len() as u128, multiset_count(3, 4));
        assert!(ms.iter().map(|(_, w)| w).sum::<BigRational>().is_one());
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_string(&ratio(1, 2500), 20), "0.0004");
        assert_eq!(decimal_string(&ratio(-9, 40000), 20), "-0.000225");
        assert_eq!(decimal_string(&ratio(1, 3), 5), "0.33333...");
        assert_eq!(decimal_string(&ratio(7, 1), 5), "7");
    }
}
