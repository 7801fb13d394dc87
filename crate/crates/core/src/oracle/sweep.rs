//! Randomized sweeps: bounds and count-sum identities of `σ̂_N²` over many
//! random samples, optionally cross-checked against the brute-force oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::brute::brute_stats;
use crate::estimators::{analyze, Estimator};
use crate::rank_core::TwoSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Normal values, no ties.
    Continuous,
    /// Integers from a range of at most four values.
    HeavyTies,
    /// Five-point scores with random cell probabilities per group.
    Ordinal,
}

impl SampleKind {
    pub const ALL: [SampleKind; 3] = [SampleKind::Continuous, SampleKind::HeavyTies, SampleKind::Ordinal];
}

/// RNG for item `index` of a sweep keyed by `seed`.
pub fn sweep_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws one sample of `kind` with group sizes uniform on `n_min..=n_max`.
pub fn random_sample<R: Rng + ?Sized>(rng: &mut R, kind: SampleKind, n_min: usize, n_max: usize) -> TwoSample {
    let n1 = rng.random_range(n_min..=n_max);
    let n2 = rng.random_range(n_min..=n_max);
    let (g1, g2) = match kind {
        SampleKind::Continuous => {
            let shift: f64 = rng.random_range(-2.0..3.0);
            let g1 = (0..n1).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect();
            let g2 = (0..n2).map(|_| shift + Distribution::<f64>::sample(&StandardNormal, rng)).collect::<Vec<f64>>();
            (g1, g2)
        }
        SampleKind::HeavyTies => {
            let top: i32 = rng.random_range(0..=3);
            let shift: i32 = rng.random_range(0..=1);
            let g1 = (0..n1).map(|_| f64::from(rng.random_range(0..=top))).collect();
            let g2 = (0..n2).map(|_| f64::from(rng.random_range(0..=top) + shift)).collect();
            (g1, g2)
        }
        SampleKind::Ordinal => {
            let cells = |n: usize, rng: &mut R| -> Vec<f64> {
                let weights: Vec<f64> = (0..5).map(|_| rng.random::<f64>().powi(2)).collect();
                let total: f64 = weights.iter().sum();
                (0..n)
                    .map(|_| {
                        let mut u = rng.random::<f64>() * total;
                        for (k, w) in weights.iter().enumerate() {
                            if u < *w {
                                return (k + 1) as f64;
                            }
                            u -= w;
                        }
                        5.0
                    })
                    .collect()
            };
            let g1 = cells(n1, rng);
            let g2 = cells(n2, rng);
            (g1, g2)
        }
    };
    TwoSample::new(g1, g2).expect("generated values are finite and groups non-empty")
}

/// Aggregated outcome of [`identity_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepReport {
    pub samples: u64,
    /// Samples with `σ̂_N² < 0`.
    pub negative: u64,
    /// Samples with `σ̂_N² > θ̂(1 − θ̂)/(m − 1) + 1e-12`.
    pub above_bound: u64,
    /// Samples with `σ̂_N² > 1/(4(m − 1))`.
    pub above_quarter: u64,
    pub min_sigma_n_sq: f64,
    /// Largest `σ̂_N² − θ̂(1 − θ̂)/(m − 1)`.
    pub max_bound_excess: f64,
    /// Samples with `σ̂_N² = 0` exactly.
    pub zero_attained: u64,
    /// Samples with positive bound and `σ̂_N² ≥ (1 − 1e-12)·bound`.
    pub upper_attained: u64,
    /// Largest `|σ̂_N² − (θ̂² − D/d_N)|`.
    pub max_appendix_error: f64,
    /// Largest `|A + B + C + D − E²|` and `|A − (E − F/4)|`.
    pub max_count_identity_error: f64,
    /// Samples also evaluated by brute force (both groups ≤ `brute_max_n`).
    pub brute_checked: u64,
    /// Largest deviation between rank-based and brute-force results.
    pub max_brute_error: f64,
}

impl SweepReport {
    fn empty() -> Self {
        Self {
            samples: 0,
            negative: 0,
            above_bound: 0,
            above_quarter: 0,
            min_sigma_n_sq: f64::INFINITY,
            max_bound_excess: f64::NEG_INFINITY,
            zero_attained: 0,
            upper_attained: 0,
            max_appendix_error: 0.0,
            max_count_identity_error: 0.0,
            brute_checked: 0,
            max_brute_error: 0.0,
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            samples: self.samples + o.samples,
            negative: self.negative + o.negative,
            above_bound: self.above_bound + o.above_bound,
            above_quarter: self.above_quarter + o.above_quarter,
            min_sigma_n_sq: self.min_sigma_n_sq.min(o.min_sigma_n_sq),
            max_bound_excess: self.max_bound_excess.max(o.max_bound_excess),
            zero_attained: self.zero_attained + o.zero_attained,
            upper_attained: self.upper_attained + o.upper_attained,
            max_appendix_error: self.max_appendix_error.max(o.max_appendix_error),
            max_count_identity_error: self.max_count_identity_error.max(o.max_count_identity_error),
            brute_checked: self.brute_checked + o.brute_checked,
            max_brute_error: self.max_brute_error.max(o.max_brute_error),
        }
    }

    /// Bounds hold everywhere and every identity error is within `tol`.
    pub fn passed(&self, tol: f64) -> bool {
        self.negative == 0
            && self.above_bound == 0
            && self.above_quarter == 0
            && self.max_appendix_error <= tol
            && self.max_count_identity_error <= tol
            && self.max_brute_error <= tol
    }
}

/// Parameters of [`identity_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub samples: u64,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    /// Samples with both groups at most this large are also brute-forced.
    pub brute_max_n: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, n_min: 2, n_max: 30, brute_max_n: 6 }
    }
}

fn check_one(config: &SweepConfig, index: u64) -> SweepReport {
    let mut rng = sweep_rng(config.seed, index);
    let kind = SampleKind::ALL[(index % 3) as usize];
    let sample = random_sample(&mut rng, kind, config.n_min, config.n_max);
    let a = analyze(&sample).expect("sizes at least two");
    let sigma = a.variances.sigma_n_sq;
    let t = a.summary.theta_hat;
    let m = sample.min_size() as f64;
    let bound = t * (1.0 - t) / (m - 1.0);
    let cs = a.count_sums;

    let mut r = SweepReport::empty();
    r.samples = 1;
    r.negative = u64::from(sigma < 0.0);
    r.above_bound = u64::from(sigma > bound + 1e-12);
    r.above_quarter = u64::from(sigma > 1.0 / (4.0 * (m - 1.0)));
    r.min_sigma_n_sq = sigma;
    r.max_bound_excess = sigma - bound;
    r.zero_attained = u64::from(sigma == 0.0);
    r.upper_attained = u64::from(bound > 0.0 && sigma >= (1.0 - 1e-12) * bound);
    r.max_appendix_error = (sigma - (t * t - cs.d / cs.d_n as f64)).abs();
    r.max_count_identity_error = (cs.a + cs.b + cs.c + cs.d - cs.e * cs.e)
        .abs()
        .max((cs.a - (cs.e - cs.f / 4.0)).abs());

    if sample.n1() <= config.brute_max_n && sample.n2() <= config.brute_max_n {
        let b = brute_stats::<f64>(sample.group1(), sample.group2()).expect("valid sample");
        let est = b.estimates();
        let bc = b.count_sums();
        let mut err = Estimator::ALL
            .iter()
            .map(|&e| (est.get(e) - a.variances.get(e)).abs())
            .fold(0.0, f64::max);
        for (x, y) in [(bc.a, cs.a), (bc.b, cs.b), (bc.c, cs.c), (bc.d, cs.d), (bc.e, cs.e), (bc.f, cs.f)] {
            err = err.max((x - y).abs());
        }
        r.brute_checked = 1;
        r.max_brute_error = err;
    }
    r
}

/// Checks bounds and identities of `σ̂_N²` on `config.samples` random
/// samples, rotating through the three [`SampleKind`]s.
pub fn identity_sweep(config: &SweepConfig) -> SweepReport {
    (0..config.samples)
        .into_par_iter()
        .map(|i| check_one(config, i))
        .reduce(SweepReport::empty, SweepReport::merge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_passes() {
        let r = identity_sweep(&SweepConfig { samples: 3000, seed: 11, n_min: 2, n_max: 8, brute_max_n: 8 });
        assert_eq!(r.samples, 3000);
        assert_eq!(r.brute_checked, 3000);
        assert!(r.passed(1e-12), "{r:?}");
        assert!(r.zero_attained > 0);
    }

    #[test]
    fn samples_are_reproducible() {
        for kind in SampleKind::ALL {
            let a = random_sample(&mut sweep_rng(5, 9), kind, 2, 30);
            let b = random_sample(&mut sweep_rng(5, 9), kind, 2, 30);
            assert_eq!(a, b);
            assert!(a.min_size() >= 2);
        }
    }
}
