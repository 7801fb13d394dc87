use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::checked_beta_reg;
use statrs::function::erf::erfc;

use super::quadrature::integrate;
use super::{discrete_ground_truth, GroundTruth, POISSON_TAIL, QUADRATURE_TOL};
use crate::error::{Error, Result};
use crate::estimators::normal_quantile;
use crate::rank_core::TwoSample;

/// Truncated supports longer than this are rejected.
const MAX_SUPPORT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Continuous,
    Discrete,
}

/// A finite discrete distribution with distinct, increasing values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidParameter(
                "discrete support and probabilities must be non-empty and of equal length".into(),
            ));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("support values must be finite and strictly increasing".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameter("probabilities must be non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { values, probs, cumulative })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v < x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    fn cdf_right(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.values[idx.min(self.values.len() - 1)]
    }
}

/// The distribution of one group.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Mass `θ` uniform on (0, 1) and `1 − θ` uniform on (2, 3).
    DMaxOuter { theta: f64 },
    Discrete(DiscreteDist),
}

impl Marginal {
    pub fn kind(&self) -> Kind {
        match self {
            Marginal::Discrete(_) => Kind::Discrete,
            _ => Kind::Continuous,
        }
    }

    /// Normalized distribution function `(F⁺(x) + F⁻(x))/2`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Normal { mean, sd } => 0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2)),
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Marginal::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Marginal::DMaxOuter { theta } => {
                if x <= 0.0 {
                    0.0
                } else if x <= 1.0 {
                    theta * x
                } else if x <= 2.0 {
                    *theta
                } else if x <= 3.0 {
                    (1.0 - theta) * x + 3.0 * theta - 2.0
                } else {
                    1.0
                }
            }
            Marginal::Discrete(d) => 0.5 * (d.cdf_left(x) + d.cdf_right(x)),
        }
    }

    /// Right-continuous distribution function `P(X ≤ x)`.
    pub fn cdf_right(&self, x: f64) -> f64 {
        match self {
            Marginal::Discrete(d) => d.cdf_right(x),
            _ => self.cdf(x),
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self {
            Marginal::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Marginal::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Marginal::Uniform { lo, hi } => {
                if (*lo..=*hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Marginal::DMaxOuter { theta } => {
                if (0.0..=1.0).contains(&x) {
                    *theta
                } else if (2.0..=3.0).contains(&x) {
                    1.0 - theta
                } else {
                    0.0
                }
            }
            Marginal::Discrete(_) => 0.0,
        }
    }

    /// Intervals on which the density is smooth and carries all but a
    /// negligible amount of mass.
    fn pieces(&self) -> Vec<(f64, f64)> {
        match self {
            Marginal::Normal { mean, sd } => vec![(mean - 14.0 * sd, *mean), (*mean, mean + 14.0 * sd)],
            Marginal::Exponential { rate } => {
                vec![(0.0, 1.0 / rate), (1.0 / rate, 6.0 / rate), (6.0 / rate, 60.0 / rate)]
            }
            Marginal::Uniform { lo, hi } => vec![(*lo, *hi)],
            Marginal::DMaxOuter { .. } => vec![(0.0, 1.0), (2.0, 3.0)],
            Marginal::Discrete(_) => Vec::new(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Marginal::Normal { mean, sd } => Normal::new(*mean, *sd)
                .expect("validated normal parameters")
                .sample(rng),
            Marginal::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Marginal::DMaxOuter { theta } => {
                // inverse of the piecewise-linear F1
                let u: f64 = rng.random();
                if u < *theta {
                    u / theta
                } else {
                    2.0 + (u - theta) / (1.0 - theta)
                }
            }
            Marginal::Discrete(d) => d.sample(rng),
        }
    }
}

/// `∫ g(x) dF(x)` over a continuous marginal, splitting at `breaks`.
fn expect_continuous(marginal: &Marginal, breaks: &[f64], g: impl Fn(f64) -> f64) -> Result<f64> {
    let mut intervals = Vec::new();
    for (a, b) in marginal.pieces() {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.sort_by(|x, y| x.total_cmp(y));
        let mut lo = a;
        for c in cuts {
            intervals.push((lo, c));
            lo = c;
        }
        intervals.push((lo, b));
    }
    let tol = QUADRATURE_TOL / intervals.len().max(1) as f64;
    intervals
        .into_iter()
        .map(|(a, b)| integrate(|x| g(x) * marginal.density(x), a, b, tol))
        .sum()
}

/// A named pair of distributions (F1, F2) with samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    name: String,
    params: BTreeMap<String, f64>,
    group1: Marginal,
    group2: Marginal,
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

fn require_open_unit(theta: f64) -> Result<()> {
    require(theta > 0.0 && theta < 1.0, || format!("theta = {theta} must lie in (0, 1)"))
}

fn poisson_support(lambda: f64) -> Result<DiscreteDist> {
    require(lambda > 0.0 && lambda.is_finite(), || format!("Poisson mean {lambda} must be positive"))?;
    let mut values = Vec::new();
    let mut probs = Vec::new();
    // log-space recursion keeps large means from underflowing at k = 0
    let mut log_p = -lambda;
    let mut total = 0.0;
    let mut k = 0u64;
    while total < 1.0 - POISSON_TAIL {
        let p = log_p.exp();
        values.push(k as f64);
        probs.push(p);
        total += p;
        k += 1;
        log_p += lambda.ln() - (k as f64).ln();
        if values.len() > MAX_SUPPORT {
            return Err(Error::Truncation(format!(
                "Poisson({lambda}) needs more than {MAX_SUPPORT} support points"
            )));
        }
        if p == 0.0 && k as f64 > lambda {
            return Err(Error::Truncation(format!(
                "Poisson({lambda}) mass stalled at {total} below 1 - {POISSON_TAIL}"
            )));
        }
    }
    // renormalize the truncated table so the sampler and the exact sums
    // describe the same distribution
    for p in &mut probs {
        *p /= total;
    }
    DiscreteDist::new(values, probs)
}

fn ordinal5_cells(a: f64, b: f64) -> Result<DiscreteDist> {
    require(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(), || {
        format!("Beta shapes ({a}, {b}) must be positive")
    })?;
    let cut = |k: usize| -> Result<f64> {
        match k {
            0 => Ok(0.0),
            5 => Ok(1.0),
            _ => checked_beta_reg(a, b, k as f64 / 5.0)
                .map_err(|e| Error::InvalidParameter(format!("incomplete beta failed: {e}"))),
        }
    };
    let mut probs = Vec::with_capacity(5);
    for k in 1..=5 {
        probs.push((cut(k)? - cut(k - 1)?).max(0.0));
    }
    DiscreteDist::new((1..=5).map(f64::from).collect(), probs)
}

impl DistributionSpec {
    fn build(name: &str, params: BTreeMap<String, f64>, group1: Marginal, group2: Marginal) -> Self {
        Self { name: name.to_string(), params, group1, group2 }
    }

    /// `N(mean1, sd1²)` versus `N(mean2, sd2²)`.
    pub fn normal(mean1: f64, sd1: f64, mean2: f64, sd2: f64) -> Result<Self> {
        for (m, s) in [(mean1, sd1), (mean2, sd2)] {
            require(m.is_finite() && s > 0.0 && s.is_finite(), || {
                format!("normal parameters ({m}, {s}) invalid")
            })?;
        }
        Ok(Self::build(
            "normal",
            params(&[("mean1", mean1), ("sd1", sd1), ("mean2", mean2), ("sd2", sd2)]),
            Marginal::Normal { mean: mean1, sd: sd1 },
            Marginal::Normal { mean: mean2, sd: sd2 },
        ))
    }

    /// `N(0, sd1²)` versus `N(δ, sd2²)` with `δ = Φ⁻¹(θ)·√(sd1² + sd2²)`.
    pub fn normal_theta(theta: f64, sd1: f64, sd2: f64) -> Result<Self> {
        require_open_unit(theta)?;
        let delta = normal_quantile(theta) * (sd1 * sd1 + sd2 * sd2).sqrt();
        let mut spec = Self::normal(0.0, sd1, delta, sd2)?;
        spec.params = params(&[("theta", theta), ("sd1", sd1), ("sd2", sd2)]);
        Ok(spec)
    }

    /// Exponential distributions with the given rates.
    pub fn exponential(rate1: f64, rate2: f64) -> Result<Self> {
        for r in [rate1, rate2] {
            require(r > 0.0 && r.is_finite(), || format!("exponential rate {r} must be positive"))?;
        }
        Ok(Self::build(
            "exponential",
            params(&[("rate1", rate1), ("rate2", rate2)]),
            Marginal::Exponential { rate: rate1 },
            Marginal::Exponential { rate: rate2 },
        ))
    }

    /// Rate 1 in group 1 and `(1 − θ)/θ` in group 2, so that `P(X1 < X2) = θ`.
    pub fn exponential_theta(theta: f64) -> Result<Self> {
        require_open_unit(theta)?;
        let mut spec = Self::exponential(1.0, (1.0 - theta) / theta)?;
        spec.params = params(&[("theta", theta)]);
        Ok(spec)
    }

    /// The pair attaining the maximal variance `θ(1 − θ)/n1` of `θ̂`.
    pub fn dmax(theta: f64) -> Result<Self> {
        require_open_unit(theta)?;
        Ok(Self::build(
            "dmax",
            params(&[("theta", theta)]),
            Marginal::DMaxOuter { theta },
            Marginal::Uniform { lo: 1.0, hi: 2.0 },
        ))
    }

    /// `Poisson(lambda1)` versus `Poisson(lambda2)`, truncated where the
    /// cumulative mass reaches `1 − 1e-12`.
    pub fn poisson(lambda1: f64, lambda2: f64) -> Result<Self> {
        Ok(Self::build(
            "poisson",
            params(&[("lambda1", lambda1), ("lambda2", lambda2)]),
            Marginal::Discrete(poisson_support(lambda1)?),
            Marginal::Discrete(poisson_support(lambda2)?),
        ))
    }

    /// Ordinal data `INT(5·X) + 1` with `X ~ Beta(a_i, b_i)`.
    pub fn ordinal5(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        Ok(Self::build(
            "ordinal5",
            params(&[("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2)]),
            Marginal::Discrete(ordinal5_cells(a1, b1)?),
            Marginal::Discrete(ordinal5_cells(a2, b2)?),
        ))
    }

    /// [`DistributionSpec::ordinal5`] with `a2` solved by bisection so that
    /// the pair has the requested `θ`.
    pub fn ordinal5_theta(theta: f64, a1: f64, b1: f64, b2: f64) -> Result<Self> {
        require_open_unit(theta)?;
        let theta_at = |ln_a2: f64| -> Result<f64> { Ok(Self::ordinal5(a1, b1, ln_a2.exp(), b2)?.ground_truth()?.theta) };
        let (mut lo, mut hi) = ((1e-3f64).ln(), (1e5f64).ln());
        if theta_at(lo)? > theta || theta_at(hi)? < theta {
            return Err(Error::InvalidParameter(format!(
                "theta = {theta} not reachable by varying a2 with a1 = {a1}, b1 = {b1}, b2 = {b2}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if theta_at(mid)? < theta {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        let a2 = 0.5 * (lo + hi);
        let mut spec = Self::ordinal5(a1, b1, a2.exp(), b2)?;
        spec.params = params(&[("theta", theta), ("a1", a1), ("b1", b1), ("b2", b2)]);
        Ok(spec)
    }

    /// Two arbitrary finite distributions.
    pub fn discrete(values1: Vec<f64>, probs1: Vec<f64>, values2: Vec<f64>, probs2: Vec<f64>) -> Result<Self> {
        Ok(Self::build(
            "discrete",
            BTreeMap::new(),
            Marginal::Discrete(DiscreteDist::new(values1, probs1)?),
            Marginal::Discrete(DiscreteDist::new(values2, probs2)?),
        ))
    }

    /// Builds a spec from its JSON form `{name, params}`.
    pub fn from_config(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "normal" => &["theta", "mean1", "sd1", "mean2", "sd2", "delta"],
            "exponential" => &["theta", "rate1", "rate2"],
            "dmax" => &["theta"],
            "poisson" => &["lambda1", "lambda2"],
            "ordinal5" => &["theta", "a1", "b1", "a2", "b2"],
            other => return Err(Error::InvalidConfig(format!("unknown distribution family {other:?}"))),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidConfig(format!("unknown parameter {bad:?} for {name}")));
        }
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            params
                .get(key)
                .copied()
                .or(default)
                .ok_or_else(|| Error::InvalidConfig(format!("{name} requires parameter {key:?}")))
        };
        let theta = params.get("theta").copied();
        let spec = match (name, theta) {
            ("normal", Some(t)) => Self::normal_theta(t, get("sd1", Some(1.0))?, get("sd2", Some(1.0))?),
            ("normal", None) => {
                let mean2 = match params.get("delta") {
                    Some(d) => *d,
                    None => get("mean2", Some(0.0))?,
                };
                Self::normal(get("mean1", Some(0.0))?, get("sd1", Some(1.0))?, mean2, get("sd2", Some(1.0))?)
            }
            ("exponential", Some(t)) => Self::exponential_theta(t),
            ("exponential", None) => Self::exponential(get("rate1", Some(1.0))?, get("rate2", None)?),
            ("dmax", _) => Self::dmax(get("theta", None)?),
            ("poisson", _) => Self::poisson(get("lambda1", None)?, get("lambda2", None)?),
            ("ordinal5", Some(t)) => {
                Self::ordinal5_theta(t, get("a1", Some(2.0))?, get("b1", Some(15.0))?, get("b2", Some(15.0))?)
            }
            ("ordinal5", None) => Self::ordinal5(
                get("a1", Some(2.0))?,
                get("b1", Some(15.0))?,
                get("a2", None)?,
                get("b2", Some(15.0))?,
            ),
            _ => unreachable!("family validated above"),
        }?;
        Ok(Self { params: params.clone(), ..spec })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// `name[key=value;...]`, free of commas so it can be a CSV field.
    pub fn label(&self) -> String {
        let inner: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", self.name, inner.join(";"))
    }

    pub fn kind(&self) -> Kind {
        self.group1.kind()
    }

    pub fn group1(&self) -> &Marginal {
        &self.group1
    }

    pub fn group2(&self) -> &Marginal {
        &self.group2
    }

    /// Ground truth by exact sums over the (truncated) supports or by
    /// adaptive quadrature.
    pub fn ground_truth(&self) -> Result<GroundTruth> {
        match (&self.group1, &self.group2) {
            (Marginal::Discrete(d1), Marginal::Discrete(d2)) => {
                Ok(discrete_ground_truth(d1.values(), d1.probs(), d2.values(), d2.probs()))
            }
            (m1, m2) if m1.kind() == Kind::Continuous && m2.kind() == Kind::Continuous => {
                let breaks: Vec<f64> = m1.pieces().into_iter().chain(m2.pieces()).flat_map(|(a, b)| [a, b]).collect();
                let theta = expect_continuous(m2, &breaks, |x| m1.cdf(x))?;
                let f1_sq = expect_continuous(m2, &breaks, |x| m1.cdf(x).powi(2))?;
                let f2_sq = expect_continuous(m1, &breaks, |x| m2.cdf(x).powi(2))?;
                Ok(GroundTruth {
                    theta,
                    sigma1_sq: f2_sq - (1.0 - theta).powi(2),
                    sigma2_sq: f1_sq - theta * theta,
                    tau: 0.0,
                })
            }
            _ => Err(Error::InvalidParameter(
                "mixed continuous/discrete pairs have no ground truth".into(),
            )),
        }
    }

    pub fn sample_group<R: Rng + ?Sized>(&self, group: u8, rng: &mut R, n: usize) -> Vec<f64> {
        let m = if group == 1 { &self.group1 } else { &self.group2 };
        (0..n).map(|_| m.sample(rng)).collect()
    }

    /// Draws `n1` observations from F1, then `n2` from F2.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n1: usize, n2: usize) -> Result<TwoSample> {
        let g1 = self.sample_group(1, rng, n1);
        let g2 = self.sample_group(2, rng, n2);
        TwoSample::new(g1, g2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{dmax_closed_form, exponential_closed_form};

    #[test]
    fn identical_continuous_pair() {
        let g = DistributionSpec::normal(1.0, 2.0, 1.0, 2.0).unwrap().ground_truth().unwrap();
        assert!((g.theta - 0.5).abs() < 1e-10);
        assert_eq!(g.tau, 0.0);
        assert!((g.sigma1_sq - 1.0 / 12.0).abs() < 1e-9);
        assert!((g.sigma2_sq - 1.0 / 12.0).abs() < 1e-9);
    }

    #[test]
    fn exponential_quadrature_matches_closed_form() {
        for (l1, l2) in [(1.0, 1.0), (1.0, 0.25), (3.0, 0.5), (0.2, 7.0)] {
            let q = DistributionSpec::exponential(l1, l2).unwrap().ground_truth().unwrap();
            let c = exponential_closed_form(l1, l2);
            assert!((q.theta - l1 / (l1 + l2)).abs() < 1e-9);
            assert!((q.sigma1_sq - c.sigma1_sq).abs() < 1e-9, "{q:?} {c:?}");
            assert!((q.sigma2_sq - c.sigma2_sq).abs() < 1e-9);
        }
    }

    #[test]
    fn dmax_quadrature_matches_closed_form() {
        for theta in [0.1, 0.5, 0.77, 0.99] {
            let q = DistributionSpec::dmax(theta).unwrap().ground_truth().unwrap();
            let c = dmax_closed_form(theta);
            assert!((q.theta - c.theta).abs() < 1e-9);
            assert!((q.sigma1_sq - c.sigma1_sq).abs() < 1e-9);
            assert!(q.sigma2_sq.abs() < 1e-9);
        }
        let g = DistributionSpec::dmax(0.5).unwrap().ground_truth().unwrap();
        assert!((g.sigma1_sq - 0.25).abs() < 1e-9);
        assert!((g.sigma_n_sq(10, 10) - 0.025).abs() < 1e-9);
    }

    #[test]
    fn dmax_marginal_is_constant_on_group2_support() {
        let m = Marginal::DMaxOuter { theta: 0.37 };
        for x in [1.0, 1.3, 1.99, 2.0] {
            assert!((m.cdf(x) - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn normal_theta_mapping() {
        for theta in [0.5, 0.6, 0.9, 0.99] {
            let g = DistributionSpec::normal_theta(theta, 1.0, 2.0).unwrap().ground_truth().unwrap();
            assert!((g.theta - theta).abs() < 1e-9, "{theta} {g:?}");
        }
    }

    #[test]
    fn poisson_tie_mass() {
        let g = DistributionSpec::poisson(1.0, 1.0).unwrap().ground_truth().unwrap();
        assert!((g.theta - 0.5).abs() < 1e-12);
        // e^-2 Σ 1/(k!)²
        let mut term = 1.0f64;
        let mut sum = 0.0;
        for k in 0..40 {
            if k > 0 {
                term /= (k * k) as f64;
            }
            sum += term;
        }
        assert!((g.tau - (-2.0f64).exp() * sum).abs() < 1e-11);
        assert!((g.tau - 0.308508).abs() < 1e-6);
    }

    #[test]
    fn poisson_truncation_sums_to_one() {
        let Marginal::Discrete(d) = DistributionSpec::poisson(13.0, 1.0).unwrap().group1().clone() else {
            panic!("discrete")
        };
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(DistributionSpec::poisson(0.0, 1.0).is_err());
    }

    #[test]
    fn ordinal_cells_partition() {
        let d = ordinal5_cells(2.0, 15.0).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d.values(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(ordinal5_cells(0.0, 1.0).is_err());
    }

    #[test]
    fn ordinal_identical_shapes() {
        let g = DistributionSpec::ordinal5(2.0, 15.0, 2.0, 15.0).unwrap().ground_truth().unwrap();
        assert!((g.theta - 0.5).abs() < 1e-14);
        assert!(g.tau > 0.0);
    }

    #[test]
    fn ordinal_grid_monotone() {
        let thetas: Vec<f64> = (2..=8)
            .map(|a2| DistributionSpec::ordinal5(2.0, 15.0, a2 as f64, 15.0).unwrap().ground_truth().unwrap().theta)
            .collect();
        assert!(thetas.windows(2).all(|w| w[0] < w[1]), "{thetas:?}");
    }

    #[test]
    fn ordinal_theta_calibration() {
        for theta in [0.5, 0.7, 0.95, 0.99] {
            let g = DistributionSpec::ordinal5_theta(theta, 2.0, 15.0, 15.0).unwrap().ground_truth().unwrap();
            assert!((g.theta - theta).abs() < 1e-9, "{theta}: {g:?}");
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(DistributionSpec::dmax(0.0).is_err());
        assert!(DistributionSpec::dmax(1.0).is_err());
        assert!(DistributionSpec::normal(0.0, -1.0, 0.0, 1.0).is_err());
        assert!(DistributionSpec::exponential(1.0, 0.0).is_err());
        let mut p = BTreeMap::new();
        p.insert("bogus".to_string(), 1.0);
        assert!(matches!(DistributionSpec::from_config("dmax", &p), Err(Error::InvalidConfig(_))));
        assert!(DistributionSpec::from_config("cauchy", &BTreeMap::new()).is_err());
    }

    #[test]
    fn config_label_is_csv_safe() {
        let p = params(&[("theta", 0.7), ("sd1", 1.0)]);
        let spec = DistributionSpec::from_config("normal", &p).unwrap();
        assert_eq!(spec.label(), "normal[sd1=1;theta=0.7]");
    }

    #[test]
    fn invariants_hold_for_families() {
        let specs = [
            DistributionSpec::normal_theta(0.8, 1.0, 3.0).unwrap(),
            DistributionSpec::exponential_theta(0.9).unwrap(),
            DistributionSpec::dmax(0.3).unwrap(),
            DistributionSpec::poisson(1.0, 3.0).unwrap(),
            DistributionSpec::ordinal5(2.0, 15.0, 5.0, 15.0).unwrap(),
        ];
        for spec in &specs {
            let g = spec.ground_truth().unwrap();
            g.check_invariants(10, 10, 1e-9).unwrap();
            if spec.kind() == Kind::Continuous {
                assert_eq!(g.tau, 0.0);
            }
        }
    }
}
