//! Exhaustive search for samples on a value grid that push `σ̂_N²` towards
//! its upper bound `θ̂(1 − θ̂)/(m − 1)`.

use serde::Serialize;

use crate::estimators::analyze;
use crate::rank_core::TwoSample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSearch {
    pub group1: Vec<f64>,
    pub group2: Vec<f64>,
    pub sigma_n_sq: f64,
    pub bound: f64,
    /// `σ̂_N² / bound`, or 0 when `θ̂ ∈ {0, 1}`.
    pub ratio: f64,
    pub searched: usize,
}

/// Non-decreasing sequences of length `n` over `grid`.
fn multisets(grid: &[f64], n: usize) -> Vec<Vec<f64>> {
    fn rec(grid: &[f64], start: usize, n: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..grid.len() {
            cur.push(grid[i]);
            rec(grid, i, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(grid, 0, n, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Searches every pair of multisets of sizes `n1`, `n2` drawn from `grid`
/// and returns the first one of maximal ratio. Group sizes below 2 or an
/// empty grid yield `None`.
pub fn bound_search(n1: usize, n2: usize, grid: &[f64]) -> Option<BoundSearch> {
    let mut grid: Vec<f64> = grid.iter().copied().filter(|x| x.is_finite()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if n1 < 2 || n2 < 2 || grid.is_empty() {
        return None;
    }
    let m = n1.min(n2) as f64;
    let first = multisets(&grid, n1);
    let second = multisets(&grid, n2);
    let mut best: Option<BoundSearch> = None;
    let mut searched = 0;
    for g1 in &first {
        for g2 in &second {
            searched += 1;
            let sample = TwoSample::new(g1.clone(), g2.clone()).expect("grid values are finite");
            let a = analyze(&sample).expect("sizes checked");
            let t = a.summary.theta_hat;
            let bound = t * (1.0 - t) / (m - 1.0);
            let ratio = if bound > 0.0 { a.variances.sigma_n_sq / bound } else { 0.0 };
            if best.as_ref().map_or(true, |b| ratio > b.ratio) {
                best = Some(BoundSearch {
                    group1: g1.clone(),
                    group2: g2.clone(),
                    sigma_n_sq: a.variances.sigma_n_sq,
                    bound,
                    ratio,
                    searched: 0,
                });
            }
        }
    }
    best.map(|b| BoundSearch { searched, ..b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_attained_on_small_grid() {
        let r = bound_search(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.searched, 100);
        assert!((r.ratio - 1.0).abs() < 1e-12, "{r:?}");
        let s = TwoSample::new(vec![1.0, 4.0], vec![2.0, 3.0]).unwrap();
        let a = analyze(&s).unwrap();
        assert!((a.variances.sigma_n_sq - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ratio_never_exceeds_one() {
        let r = bound_search(3, 2, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(r.ratio <= 1.0 + 1e-12, "{r:?}");
    }

    #[test]
    fn constant_samples_have_zero_ratio() {
        let r = bound_search(2, 2, &[5.0]).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(bound_search(1, 2, &[1.0]).is_none());
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(&[1.0, 2.0, 3.0], 2).len(), 6);
    }
}
