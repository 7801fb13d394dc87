//! Counting statistic, ranks and placements.
//!
//! Ties are detected by exact value equality. All ranks are computed in one
//! pooled sorting pass, so a tie run that straddles the two groups receives
//! the same overall mid-rank in both.

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(x))
    }
}

/// The counting statistic `c(x, y)`: 1 if `x < y`, ½ on a tie, 0 if `x > y`.
pub fn count(x: f64, y: f64) -> Result<f64> {
    check_finite(x)?;
    check_finite(y)?;
    Ok(if x < y {
        1.0
    } else if x == y {
        0.5
    } else {
        0.0
    })
}

/// Right-continuous version of [`count`]: 1 iff `x <= y`.
pub fn count_plus(x: f64, y: f64) -> Result<f64> {
    check_finite(x)?;
    check_finite(y)?;
    Ok(if x <= y { 1.0 } else { 0.0 })
}

/// Left-continuous version of [`count`]: 1 iff `x < y`.
pub fn count_minus(x: f64, y: f64) -> Result<f64> {
    check_finite(x)?;
    check_finite(y)?;
    Ok(if x < y { 1.0 } else { 0.0 })
}

/// Two independent samples. Both groups are non-empty and every value is
/// finite; variance estimation additionally needs two observations per
/// group, see [`TwoSample::require_min_size`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSample {
    group1: Vec<f64>,
    group2: Vec<f64>,
}

impl TwoSample {
    pub fn new(group1: Vec<f64>, group2: Vec<f64>) -> Result<Self> {
        if group1.is_empty() {
            return Err(Error::EmptyGroup { group: 1 });
        }
        if group2.is_empty() {
            return Err(Error::EmptyGroup { group: 2 });
        }
        for &x in group1.iter().chain(group2.iter()) {
            check_finite(x)?;
        }
        Ok(Self { group1, group2 })
    }

    pub fn group1(&self) -> &[f64] {
        &self.group1
    }

    pub fn group2(&self) -> &[f64] {
        &self.group2
    }

    pub fn n1(&self) -> usize {
        self.group1.len()
    }

    pub fn n2(&self) -> usize {
        self.group2.len()
    }

    /// Total sample size `N = n1 + n2`.
    pub fn total(&self) -> usize {
        self.n1() + self.n2()
    }

    /// `min(n1, n2)`.
    pub fn min_size(&self) -> usize {
        self.n1().min(self.n2())
    }

    pub fn require_min_size(&self, required: usize) -> Result<()> {
        for (group, n) in [(1u8, self.n1()), (2u8, self.n2())] {
            if n < required {
                return Err(Error::InsufficientSampleSize { group, n, required });
            }
        }
        Ok(())
    }

    pub fn into_groups(self) -> (Vec<f64>, Vec<f64>) {
        (self.group1, self.group2)
    }
}

/// Minimal and maximal ranks of every value, 1-based, in input order.
fn min_max_ranks<'a>(values: impl Iterator<Item = &'a f64>) -> (Vec<usize>, Vec<usize>) {
    let mut indexed: Vec<(f64, usize)> = values.copied().enumerate().map(|(i, v)| (v, i)).collect();
    // Values are finite, so partial_cmp is total. -0.0 and 0.0 compare equal
    // and therefore tie, matching `count`.
    indexed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    let n = indexed.len();
    let mut min = vec![0; n];
    let mut max = vec![0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && indexed[end].0 == indexed[start].0 {
            end += 1;
        }
        for &(_, idx) in &indexed[start..end] {
            min[idx] = start + 1;
            max[idx] = end;
        }
        start = end;
    }
    (min, max)
}

/// Mid-ranks of a single sequence of finite values.
///
/// ```
/// assert_eq!(mwvar::rank_core::mid_ranks(&[3.0, 1.0, 4.0, 1.0]), vec![3.0, 1.5, 4.0, 1.5]);
/// ```
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let (min, max) = min_max_ranks(values.iter());
    min.iter()
        .zip(&max)
        .map(|(&lo, &hi)| (lo + hi) as f64 / 2.0)
        .collect()
}

/// Ranks of one group's observations, each vector in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRanks {
    /// Mid-rank among all `N` observations.
    pub overall_mid: Vec<f64>,
    pub overall_min: Vec<usize>,
    pub overall_max: Vec<usize>,
    /// Mid-rank within the observation's own group.
    pub internal_mid: Vec<f64>,
    pub internal_min: Vec<usize>,
    pub internal_max: Vec<usize>,
    /// Overall mid-rank minus internal mid-rank: the number of observations
    /// of the other group below this one, ties counted ½.
    pub placement: Vec<f64>,
}

impl GroupRanks {
    fn build(
        overall_min: Vec<usize>,
        overall_max: Vec<usize>,
        internal_min: Vec<usize>,
        internal_max: Vec<usize>,
    ) -> Self {
        let mid = |lo: &[usize], hi: &[usize]| -> Vec<f64> {
            lo.iter().zip(hi).map(|(&a, &b)| (a + b) as f64 / 2.0).collect()
        };
        let overall_mid = mid(&overall_min, &overall_max);
        let internal_mid = mid(&internal_min, &internal_max);
        let placement = overall_mid
            .iter()
            .zip(&internal_mid)
            .map(|(o, i)| o - i)
            .collect();
        Self {
            overall_mid,
            overall_min,
            overall_max,
            internal_mid,
            internal_min,
            internal_max,
            placement,
        }
    }

    pub fn len(&self) -> usize {
        self.placement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placement.is_empty()
    }

    /// Twice the placements, as exact integers.
    pub fn doubled_placements(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(move |k| {
            (self.overall_min[k] + self.overall_max[k]) as i64
                - (self.internal_min[k] + self.internal_max[k]) as i64
        })
    }

    /// Number of observations of the other group tied with each observation:
    /// `(R⁺ − R⁻) − (R⁽ⁱ⁾⁺ − R⁽ⁱ⁾⁻)`.
    pub fn cross_ties(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).map(move |k| {
            (self.overall_max[k] - self.overall_min[k])
                - (self.internal_max[k] - self.internal_min[k])
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTables {
    pub group1: GroupRanks,
    pub group2: GroupRanks,
}

/// Overall, internal, minimal and maximal ranks and the placements of both
/// groups, in `O(N log N)`.
pub fn rank_tables(sample: &TwoSample) -> RankTables {
    let n1 = sample.n1();
    let (mut omin, mut omax) = min_max_ranks(sample.group1().iter().chain(sample.group2()));
    let omin2 = omin.split_off(n1);
    let omax2 = omax.split_off(n1);
    let (imin1, imax1) = min_max_ranks(sample.group1().iter());
    let (imin2, imax2) = min_max_ranks(sample.group2().iter());
    RankTables {
        group1: GroupRanks::build(omin, omax, imin1, imax1),
        group2: GroupRanks::build(omin2, omax2, imin2, imax2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(g1: &[f64], g2: &[f64]) -> TwoSample {
        TwoSample::new(g1.to_vec(), g2.to_vec()).unwrap()
    }

    #[test]
    fn count_cases() {
        assert_eq!(count(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(count(2.0, 2.0).unwrap(), 0.5);
        assert_eq!(count(3.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn count_plus_minus_cases() {
        assert_eq!((count_plus(2.0, 2.0).unwrap(), count_minus(2.0, 2.0).unwrap()), (1.0, 0.0));
        assert_eq!((count_plus(1.0, 2.0).unwrap(), count_minus(1.0, 2.0).unwrap()), (1.0, 1.0));
        assert_eq!((count_plus(3.0, 1.0).unwrap(), count_minus(3.0, 1.0).unwrap()), (0.0, 0.0));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(count(f64::NAN, 1.0), Err(Error::NonFinite(_))));
        assert!(count_plus(1.0, f64::INFINITY).is_err());
        assert!(count_minus(f64::NEG_INFINITY, 1.0).is_err());
        assert!(matches!(
            TwoSample::new(vec![1.0, f64::NAN], vec![2.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn empty_and_small_groups() {
        assert_eq!(TwoSample::new(vec![], vec![1.0]), Err(Error::EmptyGroup { group: 1 }));
        assert_eq!(TwoSample::new(vec![1.0], vec![]), Err(Error::EmptyGroup { group: 2 }));
        let s = sample(&[1.0, 2.0], &[3.0]);
        assert_eq!(
            s.require_min_size(2),
            Err(Error::InsufficientSampleSize { group: 2, n: 1, required: 2 })
        );
    }

    #[test]
    fn counterexample_placements() {
        let t = rank_tables(&sample(&[1.0, 1.0, 2.0, 2.0, 3.0], &[3.0, 4.0, 4.0, 4.0, 5.0]));
        assert_eq!(t.group1.placement, vec![0.0, 0.0, 0.0, 0.0, 0.5]);
        assert_eq!(t.group2.placement, vec![4.5, 5.0, 5.0, 5.0, 5.0]);
        assert_eq!(t.group2.cross_ties().collect::<Vec<_>>(), vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn full_separation_placements() {
        let t = rank_tables(&sample(&[1.0, 2.0], &[3.0, 4.0]));
        assert_eq!(t.group1.placement, vec![0.0, 0.0]);
        assert_eq!(t.group2.placement, vec![2.0, 2.0]);
    }

    #[test]
    fn single_sequence_mid_ranks() {
        assert_eq!(mid_ranks(&[3.0, 1.0, 4.0, 1.0]), vec![3.0, 1.5, 4.0, 1.5]);
    }

    #[test]
    fn signed_zero_ties() {
        let t = rank_tables(&sample(&[0.0], &[-0.0]));
        assert_eq!(t.group2.placement, vec![0.5]);
    }

    fn tied_values() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((0i32..6).prop_map(f64::from), 1..15)
    }

    fn count_sum_placements(from: &[f64], at: &[f64]) -> Vec<f64> {
        at.iter()
            .map(|&y| from.iter().map(|&x| count(x, y).unwrap()).sum())
            .collect()
    }

    proptest! {
        #[test]
        fn table_invariants(g1 in tied_values(), g2 in tied_values()) {
            let s = sample(&g1, &g2);
            let t = rank_tables(&s);
            let (n1, n2) = (s.n1() as f64, s.n2() as f64);
            let n = n1 + n2;
            let mut rank_sum = 0.0;
            for (g, other) in [(&t.group1, n2), (&t.group2, n1)] {
                for k in 0..g.len() {
                    prop_assert_eq!(g.overall_mid[k], (g.overall_min[k] + g.overall_max[k]) as f64 / 2.0);
                    prop_assert!(g.placement[k] >= 0.0 && g.placement[k] <= other);
                    rank_sum += g.overall_mid[k];
                }
            }
            prop_assert_eq!(rank_sum, n * (n + 1.0) / 2.0);
            let placement_sum: f64 = t.group1.placement.iter().chain(&t.group2.placement).sum();
            prop_assert_eq!(placement_sum, n1 * n2);
        }

        #[test]
        fn placements_match_count_sums(g1 in tied_values(), g2 in tied_values()) {
            let t = rank_tables(&sample(&g1, &g2));
            // R*_2l = n1 F̂1(X_2l) and R*_1k = n2 F̂2(X_1k)
            prop_assert_eq!(t.group2.placement, count_sum_placements(&g1, &g2));
            prop_assert_eq!(t.group1.placement, count_sum_placements(&g2, &g1));
        }

        #[test]
        fn mean_placement_identity(g1 in tied_values(), g2 in tied_values()) {
            let s = sample(&g1, &g2);
            let t = rank_tables(&s);
            let (n1, n2) = (s.n1() as f64, s.n2() as f64);
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let via_placements = mean(&t.group2.placement) / n1;
            let via_ranks = (mean(&t.group2.overall_mid) - mean(&t.group1.overall_mid)) / (n1 + n2) + 0.5;
            prop_assert!((via_placements - via_ranks).abs() <= 1e-12);
        }

        #[test]
        fn permutation_within_group(g1 in tied_values(), g2 in tied_values(), rot in 0usize..15) {
            let t = rank_tables(&sample(&g1, &g2));
            let r = rot % g1.len();
            let mut rotated = g1.clone();
            rotated.rotate_left(r);
            let tr = rank_tables(&sample(&rotated, &g2));
            let mut expected = t.group1.placement.clone();
            expected.rotate_left(r);
            prop_assert_eq!(tr.group1.placement, expected);
            prop_assert_eq!(tr.group2.placement, t.group2.placement);
        }
    }
}
