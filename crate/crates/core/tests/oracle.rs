use mwvar::estimators::{analyze, Estimator};
use mwvar::oracle::{self, brute_stats, FiniteDist, FiniteDistPair};
use mwvar::TwoSample;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn tied_group() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0i32..5, 2..8).prop_map(|v| v.into_iter().map(f64::from).collect())
}

proptest! {
    #[test]
    fn brute_force_agrees_with_ranks(g1 in tied_group(), g2 in tied_group()) {
        let s = TwoSample::new(g1.clone(), g2.clone()).unwrap();
        let fast = analyze(&s).unwrap();
        let (est, summary) = oracle::brute_estimators(&s).unwrap();
        for e in Estimator::ALL {
            prop_assert!((est.get(e) - fast.variances.get(e)).abs() <= 1e-12);
        }
        prop_assert!((summary.q1_sq - fast.summary.q1_sq).abs() <= 1e-12);
        prop_assert_eq!(oracle::brute_count_sums(&s).unwrap(), fast.count_sums);
    }

    #[test]
    fn rational_brute_force_matches_float_kernel(g1 in tied_group(), g2 in tied_group()) {
        let exact = brute_stats::<BigRational>(&g1, &g2).unwrap();
        let fast = analyze(&TwoSample::new(g1, g2).unwrap()).unwrap();
        let f = |x: &BigRational| num_traits::ToPrimitive::to_f64(x).unwrap();
        // the integer kernel rounds once, so it is within an ulp of the exact value
        let x = f(&exact.sigma_n_sq);
        prop_assert!((x - fast.variances.sigma_n_sq).abs() <= 2.0 * f64::EPSILON * x.abs());
        prop_assert!(!exact.sigma_n_sq.is_negative());
    }
}

#[test]
fn unbiased_on_all_fixtures() {
    for name in oracle::FIXTURES {
        let dist = oracle::fixture(name).unwrap();
        for (n1, n2) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let r = oracle::exact_unbiasedness(&dist, n1, n2).unwrap();
            assert!(r.holds(), "{name} ({n1}, {n2}): {r:?}");
        }
    }
}

#[test]
fn unbiased_at_size_four() {
    let r = oracle::exact_unbiasedness(&oracle::fixture("three_point").unwrap(), 4, 4).unwrap();
    assert!(r.holds());
}

#[test]
fn delong_and_shs_bias_closed_forms() {
    for name in oracle::FIXTURES {
        let dist = oracle::fixture(name).unwrap();
        let e = oracle::enumerate(&dist, 3, 2, oracle::DEFAULT_BUDGET).unwrap();
        assert_eq!(e.bias(Estimator::DeLong), e.truth.bias_dl(3, 2), "{name}");
        let shs = -e.truth.tau.clone() / BigRational::from_integer(8.into());
        assert_eq!(e.bias(Estimator::Shs), shs, "{name}");
        assert_eq!(e.identity_failures, 0);
    }
}

#[test]
fn delong_bias_is_zero_or_positive() {
    let exact = |dist: &FiniteDistPair| oracle::exact_bias(dist, 3, 3, Estimator::DeLong).unwrap();
    assert!(exact(&oracle::fixture("disjoint").unwrap()).is_zero());
    assert!(exact(&oracle::fixture("single_point").unwrap()).is_zero());
    // identical Bernoulli pairs: the tie term cancels the van Dantzig gap
    let bernoulli = FiniteDistPair::new(
        FiniteDist::from_fractions(&[0.0, 1.0], &[(9, 10), (1, 10)]).unwrap(),
        FiniteDist::from_fractions(&[0.0, 1.0], &[(9, 10), (1, 10)]).unwrap(),
    );
    assert!(exact(&bernoulli).is_zero());
    let spread = FiniteDistPair::new(
        FiniteDist::from_fractions(&[0.0, 2.0, 4.0], &[(1, 3), (1, 3), (1, 3)]).unwrap(),
        FiniteDist::from_fractions(&[1.0, 3.0, 5.0], &[(1, 3), (1, 3), (1, 3)]).unwrap(),
    );
    assert!(exact(&spread).is_positive());
}

proptest! {
    /// `θ(1 − θ) − σ1² − σ2² ≥ τ/4` for normalized distribution functions,
    /// so the closed-form DeLong bias is never negative.
    #[test]
    fn tie_corrected_van_dantzig(
        w1 in prop::collection::vec(1i64..6, 1..5),
        w2 in prop::collection::vec(1i64..6, 1..5),
        shift in -2i32..3,
    ) {
        let frac = |w: &[i64]| -> Vec<(i64, i64)> {
            let t: i64 = w.iter().sum();
            w.iter().map(|&x| (x, t)).collect()
        };
        let v1: Vec<f64> = (0..w1.len()).map(|k| k as f64).collect();
        let v2: Vec<f64> = (0..w2.len()).map(|k| (k as i32 + shift) as f64).collect();
        let dist = FiniteDistPair::new(
            FiniteDist::from_fractions(&v1, &frac(&w1)).unwrap(),
            FiniteDist::from_fractions(&v2, &frac(&w2)).unwrap(),
        );
        prop_assert!(!dist.ground_truth().bias_dl(2, 2).is_negative());
    }
}

#[test]
fn bound_never_exceeded_on_grids() {
    for (n1, n2) in [(2, 2), (2, 3), (3, 3), (4, 2)] {
        let r = oracle::bound_search(n1, n2, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(r.ratio <= 1.0 + 1e-12, "{r:?}");
    }
}
