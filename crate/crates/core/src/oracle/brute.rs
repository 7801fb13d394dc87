//! Direct transcription of the definitions: every quantity is a sum over
//! explicit loops of `count`, `count_plus` and `count_minus`, with no
//! ranking. Quadratic in `N` (quartic for `D`), so only for small samples.

use num_traits::{FromPrimitive, Num, ToPrimitive};

use crate::error::Result;
use crate::estimators::{CountSums, EffectSummary, VarianceEstimates};
use crate::rank_core::{count, count_minus, count_plus, TwoSample};

/// All estimators and count sums of one sample in the number type `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteStats<T> {
    pub n1: usize,
    pub n2: usize,
    pub theta_hat: T,
    pub tau_hat: T,
    pub q1_sq: T,
    pub q2_sq: T,
    pub sigma_n_sq: T,
    pub sigma_shs_sq: T,
    pub sigma_dl_sq: T,
    pub sigma_pm_sq: T,
    pub sigma_hm_sq: T,
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
}

fn lift<T: FromPrimitive>(n: usize) -> T {
    T::from_usize(n).expect("size representable")
}

/// Maps the values 0, ½ and 1 of the counting functions into `T` exactly.
fn exact<T: Num + Clone>(c: f64) -> T {
    let one = T::one();
    if c == 0.0 {
        T::zero()
    } else if c == 1.0 {
        one
    } else {
        one.clone() / (one.clone() + one)
    }
}

fn sum<T: Num + Clone>(it: impl Iterator<Item = T>) -> T {
    it.fold(T::zero(), |acc, x| acc + x)
}

/// Evaluates the definitions on `g1`, `g2` (both of size ≥ 2) in `T`.
pub fn brute_stats<T>(g1: &[f64], g2: &[f64]) -> Result<BruteStats<T>>
where
    T: Num + Clone + FromPrimitive,
{
    let sample = TwoSample::new(g1.to_vec(), g2.to_vec())?;
    sample.require_min_size(2)?;
    let (n1, n2) = (g1.len(), g2.len());

    // c[r][k] = c(X1r, X2k) and the tie indicator c⁺ − c⁻
    let mut c = vec![vec![T::zero(); n2]; n1];
    let mut tie = T::zero();
    for (r, &x) in g1.iter().enumerate() {
        for (k, &y) in g2.iter().enumerate() {
            c[r][k] = exact(count(x, y)?);
            tie = tie + exact::<T>(count_plus(x, y)?) - exact::<T>(count_minus(x, y)?);
        }
    }

    let pairs: T = lift(n1 * n2);
    let e = sum(c.iter().flatten().cloned());
    let f = tie;
    let theta = e.clone() / pairs.clone();
    let tau = f.clone() / pairs.clone();

    // Placements: R*_1r = Σ_k c(X2k, X1r), R*_2k = Σ_r c(X1r, X2k).
    let mut place1 = Vec::with_capacity(n1);
    for &x in g1 {
        let mut s = T::zero();
        for &y in g2 {
            s = s + exact::<T>(count(y, x)?);
        }
        place1.push(s);
    }
    let place2: Vec<T> = (0..n2).map(|k| sum(c.iter().map(|row| row[k].clone()))).collect();

    let (a1, a2): (T, T) = (lift(n1), lift(n2));
    let one = T::one();
    let mean1 = a2.clone() * (one.clone() - theta.clone());
    let mean2 = a1.clone() * theta.clone();
    let q1_sq = sum(place1.iter().map(|p| (p.clone() - mean1.clone()) * (p.clone() - mean1.clone())));
    let q2_sq = sum(place2.iter().map(|p| (p.clone() - mean2.clone()) * (p.clone() - mean2.clone())));

    let m1 = a1.clone() - one.clone();
    let m2 = a2.clone() - one.clone();
    let d_n = a1.clone() * m1.clone() * a2.clone() * m2.clone();
    let spread = theta.clone() * (one.clone() - theta.clone());
    let four: T = lift(4);

    let sigma_n_sq = ((q1_sq.clone() + q2_sq.clone()) / pairs.clone() - spread.clone() + tau.clone() / four.clone())
        / (m1.clone() * m2.clone());
    let sigma_shs_sq = (q1_sq.clone() + q2_sq.clone() - pairs.clone() * spread.clone()) / d_n.clone();
    let w1 = one.clone() - one.clone() / a2.clone();
    let w2 = one.clone() - one.clone() / a1.clone();
    let sigma_dl_sq = (w1.clone() * q1_sq.clone() + w2.clone() * q2_sq.clone()) / d_n.clone();
    let sigma_pm_sq = (w1.clone() * w1 * q1_sq.clone()
        + w2.clone() * w2 * q2_sq.clone()
        + m1.clone() * m2.clone() * spread.clone())
        / d_n;
    let two: T = lift(2);
    let sigma_hm_sq = spread / pairs
        * (one.clone()
            + m2.clone() * (one.clone() - theta.clone()) / (two - theta.clone())
            + m1.clone() * theta.clone() / (one + theta.clone()));

    // Count sums, each by its own loop.
    let a = sum(c.iter().flatten().map(|x| x.clone() * x.clone()));
    let mut b = T::zero();
    for k in 0..n2 {
        for r in 0..n1 {
            for r2 in 0..n1 {
                if r != r2 {
                    b = b + c[r][k].clone() * c[r2][k].clone();
                }
            }
        }
    }
    let mut cc = T::zero();
    for row in &c {
        for k in 0..n2 {
            for k2 in 0..n2 {
                if k != k2 {
                    cc = cc + row[k].clone() * row[k2].clone();
                }
            }
        }
    }
    let mut d = T::zero();
    for r in 0..n1 {
        for r2 in 0..n1 {
            if r == r2 {
                continue;
            }
            for k in 0..n2 {
                for k2 in 0..n2 {
                    if k != k2 {
                        d = d + c[r][k].clone() * c[r2][k2].clone();
                    }
                }
            }
        }
    }

    Ok(BruteStats {
        n1,
        n2,
        theta_hat: theta,
        tau_hat: tau,
        q1_sq,
        q2_sq,
        sigma_n_sq,
        sigma_shs_sq,
        sigma_dl_sq,
        sigma_pm_sq,
        sigma_hm_sq,
        a,
        b,
        c: cc,
        d,
        e,
        f,
    })
}

impl<T: ToPrimitive> BruteStats<T> {
    fn f(x: &T) -> f64 {
        x.to_f64().expect("representable as f64")
    }

    pub fn estimates(&self) -> VarianceEstimates {
        VarianceEstimates {
            sigma_n_sq: Self::f(&self.sigma_n_sq),
            sigma_shs_sq: Self::f(&self.sigma_shs_sq),
            sigma_dl_sq: Self::f(&self.sigma_dl_sq),
            sigma_pm_sq: Self::f(&self.sigma_pm_sq),
            sigma_hm_sq: Self::f(&self.sigma_hm_sq),
        }
    }

    pub fn summary(&self) -> EffectSummary {
        EffectSummary {
            theta_hat: Self::f(&self.theta_hat),
            tau_hat: Self::f(&self.tau_hat),
            q1_sq: Self::f(&self.q1_sq),
            q2_sq: Self::f(&self.q2_sq),
            n1: self.n1,
            n2: self.n2,
        }
    }

    pub fn count_sums(&self) -> CountSums {
        let (n1, n2) = (self.n1 as u128, self.n2 as u128);
        CountSums {
            a: Self::f(&self.a),
            b: Self::f(&self.b),
            c: Self::f(&self.c),
            d: Self::f(&self.d),
            e: Self::f(&self.e),
            f: Self::f(&self.f),
            d_n: n1 * (n1 - 1) * n2 * (n2 - 1),
        }
    }
}

/// The variance estimates and effect summary of `sample` by brute force.
pub fn brute_estimators(sample: &TwoSample) -> Result<(VarianceEstimates, EffectSummary)> {
    let stats = brute_stats::<f64>(sample.group1(), sample.group2())?;
    Ok((stats.estimates(), stats.summary()))
}

/// The count sums `A..F` of `sample` by brute force.
pub fn brute_count_sums(sample: &TwoSample) -> Result<CountSums> {
    Ok(brute_stats::<f64>(sample.group1(), sample.group2())?.count_sums())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::analyze;
    use num_rational::BigRational;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn counterexample_in_rationals() {
        let s = brute_stats::<BigRational>(&[1.0, 1.0, 2.0, 2.0, 3.0], &[3.0, 4.0, 4.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.theta_hat, ratio(49, 50));
        assert_eq!(s.tau_hat, ratio(1, 25));
        assert_eq!(s.q1_sq, ratio(1, 5));
        assert_eq!(s.q2_sq, ratio(1, 5));
        assert_eq!(s.sigma_n_sq, ratio(1, 2500));
        assert_eq!(s.sigma_shs_sq, ratio(-9, 40000));
        assert_eq!(s.sigma_dl_sq, ratio(1, 1250));
        assert_eq!((s.a.clone(), s.b.clone(), s.c.clone(), s.d.clone()), (ratio(97, 4), ratio(96, 1), ratio(96, 1), ratio(384, 1)));
        assert_eq!((s.e.clone(), s.f.clone()), (ratio(49, 2), ratio(1, 1)));
    }

    #[test]
    fn matches_rank_based() {
        let sample = TwoSample::new(vec![1.0, 1.0, 2.0, 2.0, 3.0], vec![3.0, 4.0, 4.0, 4.0, 5.0]).unwrap();
        let (est, summary) = brute_estimators(&sample).unwrap();
        let fast = analyze(&sample).unwrap();
        for e in crate::estimators::Estimator::ALL {
            assert!((est.get(e) - fast.variances.get(e)).abs() < 1e-12, "{e}");
        }
        assert!((summary.theta_hat - fast.summary.theta_hat).abs() < 1e-15);
        assert_eq!(brute_count_sums(&sample).unwrap(), fast.count_sums);
    }

    #[test]
    fn full_separation_is_zero() {
        let sample = TwoSample::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0]).unwrap();
        let (est, _) = brute_estimators(&sample).unwrap();
        for e in crate::estimators::Estimator::ALL {
            assert_eq!(est.get(e), 0.0, "{e}");
        }
    }

    #[test]
    fn rejects_small_groups() {
        assert!(brute_stats::<f64>(&[1.0], &[2.0, 3.0]).is_err());
    }
}
