//! Point estimators `θ̂`, `τ̂_N`, the quadratic forms `Q_i²` of the centered
//! placements and the family of variance estimators for `θ̂`.
//!
//! Placements are multiples of ½, so every estimator here is a ratio of
//! integers. The numerators are accumulated exactly (in `i128`, or in
//! arbitrary precision for very large samples) and converted to floating
//! point once, which keeps `σ̂_N²` non-negative to the last bit.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::rank_core::{rank_tables, RankTables, TwoSample};

/// Group sizes above this switch the exact kernel from `i128` to `BigInt`.
const I128_SIZE_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSummary {
    pub theta_hat: f64,
    pub tau_hat: f64,
    pub q1_sq: f64,
    pub q2_sq: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Sums of squares and products of count functions.
///
/// `a = Σ c²`, `b` sums products sharing the group-2 observation, `c`
/// products sharing the group-1 observation, `d` products sharing neither;
/// `e = n1·n2·θ̂` and `f = n1·n2·τ̂_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountSums {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    /// `n1(n1 − 1)n2(n2 − 1)`.
    pub d_n: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimates {
    /// The unbiased estimator (Bamber's, in placement form).
    pub sigma_n_sq: f64,
    /// Sen-Hilgers-Shirahata with mid-ranks; may be negative under ties.
    pub sigma_shs_sq: f64,
    pub sigma_dl_sq: f64,
    pub sigma_pm_sq: f64,
    pub sigma_hm_sq: f64,
}

impl VarianceEstimates {
    pub fn get(&self, estimator: Estimator) -> f64 {
        match estimator {
            Estimator::Unbiased => self.sigma_n_sq,
            Estimator::Shs => self.sigma_shs_sq,
            Estimator::DeLong => self.sigma_dl_sq,
            Estimator::PermeManevski => self.sigma_pm_sq,
            Estimator::HanleyMcNeil => self.sigma_hm_sq,
        }
    }
}

/// Identifies one of the variance estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "N", alias = "n", alias = "unbiased", alias = "bamber")]
    Unbiased,
    #[serde(rename = "SHS", alias = "shs")]
    Shs,
    #[serde(rename = "DL", alias = "dl", alias = "delong")]
    DeLong,
    #[serde(rename = "PM", alias = "pm")]
    PermeManevski,
    #[serde(rename = "HM", alias = "hm")]
    HanleyMcNeil,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Unbiased,
        Estimator::Shs,
        Estimator::DeLong,
        Estimator::PermeManevski,
        Estimator::HanleyMcNeil,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Estimator::Unbiased => "N",
            Estimator::Shs => "SHS",
            Estimator::DeLong => "DL",
            Estimator::PermeManevski => "PM",
            Estimator::HanleyMcNeil => "HM",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "unbiased" | "bamber" => Ok(Estimator::Unbiased),
            "shs" => Ok(Estimator::Shs),
            "dl" | "delong" => Ok(Estimator::DeLong),
            "pm" => Ok(Estimator::PermeManevski),
            "hm" => Ok(Estimator::HanleyMcNeil),
            _ => Err(Error::InvalidParameter(format!("unknown estimator {s:?}"))),
        }
    }
}

/// Integer sufficient statistics of the placements. `p` denotes twice a
/// placement.
#[derive(Debug, Clone, Copy)]
struct PlacementSums {
    n1: usize,
    n2: usize,
    sum_p1: i128,
    sum_p1_sq: i128,
    sum_p2: i128,
    sum_p2_sq: i128,
    /// Number of tied cross-group pairs.
    ties: i128,
}

impl PlacementSums {
    fn new(tables: &RankTables) -> Self {
        let sums = |it: &mut dyn Iterator<Item = i64>| {
            it.fold((0i128, 0i128), |(s, ss), p| {
                let p = i128::from(p);
                (s + p, ss + p * p)
            })
        };
        let (sum_p1, sum_p1_sq) = sums(&mut tables.group1.doubled_placements());
        let (sum_p2, sum_p2_sq) = sums(&mut tables.group2.doubled_placements());
        let ties = tables.group2.cross_ties().map(|t| t as i128).sum();
        Self {
            n1: tables.group1.len(),
            n2: tables.group2.len(),
            sum_p1,
            sum_p1_sq,
            sum_p2,
            sum_p2_sq,
            ties,
        }
    }

    fn pairs(&self) -> f64 {
        self.n1 as f64 * self.n2 as f64
    }

    fn theta_hat(&self) -> f64 {
        self.sum_p2 as f64 / (2.0 * self.pairs())
    }

    fn tau_hat(&self) -> f64 {
        self.ties as f64 / self.pairs()
    }

    fn d_n(&self) -> u128 {
        let (n1, n2) = (self.n1 as u128, self.n2 as u128);
        n1 * n1.saturating_sub(1) * n2 * n2.saturating_sub(1)
    }

    fn numerators(&self) -> Numerators {
        if self.n1.max(self.n2) <= I128_SIZE_LIMIT {
            self.numerators_in::<i128>()
        } else {
            self.numerators_in::<BigInt>()
        }
    }

    /// Every estimator's numerator, exactly in the integer type `I`.
    fn numerators_in<I>(&self) -> Numerators
    where
        I: Num + Clone + FromPrimitive + ToPrimitive,
    {
        let int = |x: i128| I::from_i128(x).expect("i128 fits the kernel integer type");
        let f = |x: I| x.to_f64().expect("finite numerator");
        let (n1, n2) = (int(self.n1 as i128), int(self.n2 as i128));
        let one = I::one();
        let pairs = n1.clone() * n2.clone();
        let (s1, s2) = (int(self.sum_p1), int(self.sum_p2));

        // 4·n_i·Q_i² = n_i·Σp² − (Σp)²
        let a1 = n1.clone() * int(self.sum_p1_sq) - s1.clone() * s1.clone();
        let a2 = n2.clone() * int(self.sum_p2_sq) - s2.clone() * s2.clone();
        // 4·M²·θ̂(1 − θ̂) with M = n1·n2
        let spread = s2.clone() * (pairs.clone() + pairs.clone() - s2.clone());
        let ties = int(self.ties);

        let base = n2.clone() * a1.clone() + n1.clone() * a2.clone() - spread.clone();
        let unbiased = base.clone() + pairs.clone() * ties;
        let m1 = n1.clone() - one.clone();
        let m2 = n2.clone() - one;
        let delong = m2.clone() * a1.clone() + m1.clone() * a2.clone();
        let perme = m2.clone() * m2.clone() * n1 * a1 + m1.clone() * m1.clone() * n2 * a2 + m1 * m2 * spread;

        Numerators {
            unbiased: f(unbiased),
            shs: f(base),
            delong: f(delong),
            perme: f(perme),
        }
    }

    fn q_forms(&self) -> (f64, f64) {
        let q = |n: usize, s: i128, ss: i128| {
            let n = n as i128;
            // exact for all sample sizes where n·Σp² fits i128
            match n.checked_mul(ss) {
                Some(ns) => (ns - s * s) as f64 / (4.0 * n as f64),
                None => {
                    let (n, s, ss) = (BigInt::from(n), BigInt::from(s), BigInt::from(ss));
                    (n.clone() * ss - s.clone() * s).to_f64().unwrap_or(f64::INFINITY)
                        / (4.0 * n.to_f64().unwrap_or(f64::INFINITY))
                }
            }
        };
        (
            q(self.n1, self.sum_p1, self.sum_p1_sq),
            q(self.n2, self.sum_p2, self.sum_p2_sq),
        )
    }

    fn count_sums(&self) -> CountSums {
        // Everything in quarter units, exact in i128 for the sample sizes the
        // oracle and sweeps use; converted once at the end.
        let (n1, n2) = (self.n1 as i128, self.n2 as i128);
        let a4 = 2 * self.sum_p2 - self.ties;
        let b4 = self.sum_p2_sq - a4;
        // Σ_r (2n2 − p1_r)²
        let row_sq = n1 * 4 * n2 * n2 - 4 * n2 * self.sum_p1 + self.sum_p1_sq;
        let c4 = row_sq - a4;
        let d4 = self.sum_p2 * self.sum_p2 - a4 - b4 - c4;
        CountSums {
            a: a4 as f64 / 4.0,
            b: b4 as f64 / 4.0,
            c: c4 as f64 / 4.0,
            d: d4 as f64 / 4.0,
            e: self.sum_p2 as f64 / 2.0,
            f: self.ties as f64,
            d_n: self.d_n(),
        }
    }

    fn variances(&self) -> VarianceEstimates {
        let num = self.numerators();
        let pairs = self.pairs();
        let d_n = self.d_n() as f64;
        let theta = self.theta_hat();
        VarianceEstimates {
            sigma_n_sq: num.unbiased / (4.0 * pairs * d_n),
            sigma_shs_sq: num.shs / (4.0 * pairs * d_n),
            sigma_dl_sq: num.delong / (4.0 * pairs * d_n),
            sigma_pm_sq: num.perme / (4.0 * pairs * pairs * d_n),
            sigma_hm_sq: hanley_mcneil(theta, self.n1, self.n2),
        }
    }
}

struct Numerators {
    unbiased: f64,
    shs: f64,
    delong: f64,
    perme: f64,
}

fn hanley_mcneil(theta: f64, n1: usize, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    theta * (1.0 - theta) / (n1 * n2)
        * (1.0 + (n2 - 1.0) * (1.0 - theta) / (2.0 - theta) + (n1 - 1.0) * theta / (1.0 + theta))
}

/// Everything estimable from one sample, computed from a single ranking pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub summary: EffectSummary,
    pub variances: VarianceEstimates,
    pub count_sums: CountSums,
}

impl Analysis {
    /// `θ̂(1 − θ̂)/(m − 1)`, the sharp upper bound of `σ̂_N²`.
    pub fn upper_bound(&self) -> f64 {
        let m = self.summary.n1.min(self.summary.n2) as f64;
        let t = self.summary.theta_hat;
        t * (1.0 - t) / (m - 1.0)
    }
}

/// Ranks the sample once and derives the summary, all five variance
/// estimates and the count sums. Requires two observations per group.
pub fn analyze(sample: &TwoSample) -> Result<Analysis> {
    sample.require_min_size(2)?;
    let sums = PlacementSums::new(&rank_tables(sample));
    let (q1_sq, q2_sq) = sums.q_forms();
    Ok(Analysis {
        summary: EffectSummary {
            theta_hat: sums.theta_hat(),
            tau_hat: sums.tau_hat(),
            q1_sq,
            q2_sq,
            n1: sums.n1,
            n2: sums.n2,
        },
        variances: sums.variances(),
        count_sums: sums.count_sums(),
    })
}

/// `θ̂`: mean of `c(X_1r, X_2k)` over all pairs.
pub fn theta_hat(sample: &TwoSample) -> f64 {
    PlacementSums::new(&rank_tables(sample)).theta_hat()
}

/// `τ̂_N`: fraction of tied cross-group pairs, from maximal and minimal ranks.
pub fn tau_hat(sample: &TwoSample) -> f64 {
    PlacementSums::new(&rank_tables(sample)).tau_hat()
}

/// `(Q1², Q2²)`, the sums of squared centered placements per group.
pub fn q_forms(tables: &RankTables) -> (f64, f64) {
    PlacementSums::new(tables).q_forms()
}

fn variances(sample: &TwoSample) -> Result<VarianceEstimates> {
    sample.require_min_size(2)?;
    Ok(PlacementSums::new(&rank_tables(sample)).variances())
}

/// The unbiased estimator
/// `σ̂_N² = [(Q1² + Q2²)/(n1n2) − θ̂(1 − θ̂) + τ̂_N/4] / ((n1 − 1)(n2 − 1))`.
pub fn sigma_n_sq(sample: &TwoSample) -> Result<f64> {
    Ok(variances(sample)?.sigma_n_sq)
}

/// `[Q1² + Q2² − n1n2·θ̂(1 − θ̂)]/d_N`, returned unclipped.
pub fn sigma_shs_sq(sample: &TwoSample) -> Result<f64> {
    Ok(variances(sample)?.sigma_shs_sq)
}

/// `[(1 − 1/n2)Q1² + (1 − 1/n1)Q2²]/d_N`.
pub fn sigma_dl_sq(sample: &TwoSample) -> Result<f64> {
    Ok(variances(sample)?.sigma_dl_sq)
}

/// `[(1 − 1/n2)²Q1² + (1 − 1/n1)²Q2² + (n1 − 1)(n2 − 1)θ̂(1 − θ̂)]/d_N`, with
/// the plug-in `θ̂`.
pub fn sigma_pm_sq(sample: &TwoSample) -> Result<f64> {
    Ok(variances(sample)?.sigma_pm_sq)
}

/// Hanley-McNeil: the variance of `θ̂` under exponential distributions with
/// `θ̂` plugged in.
pub fn sigma_hm_sq(sample: &TwoSample) -> f64 {
    hanley_mcneil(theta_hat(sample), sample.n1(), sample.n2())
}

/// [`sigma_hm_sq`] from a given `θ̂` and group sizes.
pub fn sigma_hm_sq_from(theta_hat: f64, n1: usize, n2: usize) -> f64 {
    hanley_mcneil(theta_hat, n1, n2)
}

/// The count sums `A..F`, derived from placement sums.
pub fn count_sums(sample: &TwoSample) -> Result<CountSums> {
    sample.require_min_size(2)?;
    Ok(PlacementSums::new(&rank_tables(sample)).count_sums())
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Wald interval `θ̂ ± z·√σ̂²`, intersected with `[0, 1]`.
pub fn wald_ci(theta_hat: f64, sigma_hat_sq: f64, level: f64) -> Result<(f64, f64)> {
    if !(sigma_hat_sq >= 0.0 && sigma_hat_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "variance must be finite and non-negative, got {sigma_hat_sq}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level {level} not in (0, 1)")));
    }
    let z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    let half = z * sigma_hat_sq.sqrt();
    Ok(((theta_hat - half).max(0.0), (theta_hat + half).min(1.0)))
}
