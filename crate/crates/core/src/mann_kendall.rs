//! Mann-Kendall monotone trend test with tie correction and the
//! continuity-corrected normal approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gistar::check_alpha;
use crate::normal;

/// Series shorter than this get no trend verdict.
pub const MIN_TREND_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    NoTrend,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Increasing => "increasing",
            Trend::Decreasing => "decreasing",
            Trend::NoTrend => "none",
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Trend::Increasing => Trend::Decreasing,
            Trend::Decreasing => Trend::Increasing,
            Trend::NoTrend => Trend::NoTrend,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MkResult {
    pub n: usize,
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub p: f64,
    pub trend: Trend,
    /// Fewer than [`MIN_TREND_LEN`] observations; `trend` is forced to
    /// `NoTrend`.
    pub too_short: bool,
}

impl MkResult {
    /// Result attached to bins that never got a test.
    pub fn untested(n: usize) -> Self {
        Self {
            n,
            s: 0,
            var_s: 0.0,
            z: 0.0,
            p: 1.0,
            trend: Trend::NoTrend,
            too_short: n < MIN_TREND_LEN,
        }
    }
}

/// Fenwick tree over dense ranks.
struct RankCounter(Vec<i64>);

impl RankCounter {
    fn new(n: usize) -> Self {
        Self(vec![0; n + 1])
    }

    fn add(&mut self, rank: usize) {
        let mut k = rank + 1;
        while k < self.0.len() {
            self.0[k] += 1;
            k += k & k.wrapping_neg();
        }
    }

    /// Number of inserted ranks strictly below `rank`.
    fn below(&self, rank: usize) -> i64 {
        let mut k = rank;
        let mut acc = 0;
        while k > 0 {
            acc += self.0[k];
            k -= k & k.wrapping_neg();
        }
        acc
    }
}

/// `S = sum_{k<l} sgn(x_l - x_k)` in `O(n log n)`, plus the tie-group sizes.
fn s_statistic(series: &[f64]) -> (i64, Vec<usize>) {
    let mut order: Vec<usize> = (0..series.len()).collect();
    order.sort_by(|&a, &b| series[a].total_cmp(&series[b]));
    let mut ranks = vec![0usize; series.len()];
    let mut ties = Vec::new();
    let mut rank = 0;
    let mut run = 0;
    for (k, &idx) in order.iter().enumerate() {
        if k > 0 && series[idx] != series[order[k - 1]] {
            rank += 1;
            if run > 1 {
                ties.push(run);
            }
            run = 0;
        }
        ranks[idx] = rank;
        run += 1;
    }
    if run > 1 {
        ties.push(run);
    }

    let mut counter = RankCounter::new(rank + 1);
    let mut s = 0i64;
    for (seen, &r) in ranks.iter().enumerate() {
        let less = counter.below(r);
        let greater = seen as i64 - counter.below(r + 1);
        s += less - greater;
        counter.add(r);
    }
    (s, ties)
}

/// Null variance of S with the tie-group correction.
fn variance(n: usize, ties: &[usize]) -> f64 {
    let term = |t: usize| {
        let t = t as i128;
        t * (t - 1) * (2 * t + 5)
    };
    (term(n) - ties.iter().map(|&t| term(t)).sum::<i128>()) as f64 / 18.0
}

/// Runs the two-tailed Mann-Kendall test on `series` at level `alpha`.
pub fn mann_kendall(series: &[f64], alpha: f64) -> Result<MkResult> {
    check_alpha(alpha)?;
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort(n));
    }
    if let Some(bad) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }

    let (s, ties) = s_statistic(series);
    let var_s = variance(n, &ties);
    let z = if var_s <= 0.0 || s == 0 {
        0.0
    } else if s > 0 {
        (s - 1) as f64 / var_s.sqrt()
    } else {
        (s + 1) as f64 / var_s.sqrt()
    };
    let p = normal::two_tailed_p(z);
    let too_short = n < MIN_TREND_LEN;
    let crit = normal::critical_z(alpha);
    let trend = if too_short {
        Trend::NoTrend
    } else if z >= crit {
        Trend::Increasing
    } else if z <= -crit {
        Trend::Decreasing
    } else {
        Trend::NoTrend
    };
    Ok(MkResult {
        n,
        s,
        var_s,
        z,
        p,
        trend,
        too_short,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_s(x: &[f64]) -> i64 {
        let mut s = 0;
        for k in 0..x.len() {
            for l in k + 1..x.len() {
                s += (x[l] - x[k]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            }
        }
        s
    }

    #[test]
    fn increasing_five() {
        let r = mann_kendall(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.05).unwrap();
        assert_eq!(r.s, 10);
        assert!((r.var_s - 16.666_666_666_666_668).abs() < 1e-9);
        assert!((r.z - 2.20454).abs() < 1e-4);
        assert_eq!(r.trend, Trend::Increasing);
        assert_eq!(brute_s(&[1.0, 2.0, 3.0, 4.0, 5.0]), 10);
    }

    #[test]
    fn decreasing_five() {
        let r = mann_kendall(&[5.0, 4.0, 3.0, 2.0, 1.0], 0.05).unwrap();
        assert_eq!(r.s, -10);
        assert!((r.z + 2.20454).abs() < 1e-4);
        assert_eq!(r.trend, Trend::Decreasing);
    }

    #[test]
    fn one_tie_group() {
        let x = [1.0, 2.0, 2.0, 3.0];
        let r = mann_kendall(&x, 0.05).unwrap();
        assert_eq!(r.s, 5);
        assert_eq!(brute_s(&x), 5);
        assert!((r.var_s - 7.666_666_666_666_667).abs() < 1e-9);
        assert!((r.z - 1.44463).abs() < 1e-4);
        assert_eq!(r.trend, Trend::NoTrend);
    }

    #[test]
    fn all_ties() {
        let r = mann_kendall(&[0.2; 6], 0.05).unwrap();
        assert_eq!((r.s, r.var_s, r.z, r.trend), (0, 0.0, 0.0, Trend::NoTrend));
    }

    #[test]
    fn short_series() {
        assert!(matches!(mann_kendall(&[1.0], 0.05), Err(Error::SeriesTooShort(1))));
        let r = mann_kendall(&[1.0, 2.0, 3.0], 0.05).unwrap();
        assert!(r.too_short);
        assert_eq!(r.s, 3);
        assert_eq!(r.trend, Trend::NoTrend);
    }

    #[test]
    fn rejects_nan() {
        assert!(matches!(
            mann_kendall(&[1.0, f64::NAN, 2.0, 3.0], 0.05),
            Err(Error::NonFinite(1))
        ));
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        // small integer alphabet so ties are common
        proptest::collection::vec((0i32..8).prop_map(f64::from), 2..50)
    }

    proptest! {
        #[test]
        fn s_matches_pair_loop(x in series()) {
            prop_assert_eq!(mann_kendall(&x, 0.05).unwrap().s, brute_s(&x));
        }

        #[test]
        fn reversal_negates_s(x in series()) {
            let mut rev = x.clone();
            rev.reverse();
            prop_assert_eq!(mann_kendall(&rev, 0.05).unwrap().s, -mann_kendall(&x, 0.05).unwrap().s);
        }

        #[test]
        fn monotone_transform_keeps_s(x in series()) {
            let t: Vec<f64> = x.iter().map(|v| (v * 0.7).exp() - 3.0).collect();
            prop_assert_eq!(mann_kendall(&t, 0.05).unwrap().s, mann_kendall(&x, 0.05).unwrap().s);
        }

        #[test]
        fn bounds_and_signs(x in series()) {
            let r = mann_kendall(&x, 0.05).unwrap();
            let n = x.len() as i64;
            prop_assert!(r.s.abs() <= n * (n - 1) / 2);
            prop_assert!(r.var_s >= 0.0);
            let all_tied = x.iter().all(|v| *v == x[0]);
            prop_assert_eq!(r.var_s == 0.0, all_tied);
            // |S| = 1 corrects down to exactly zero
            prop_assert!(r.z * r.s as f64 >= 0.0);
            if r.s == 0 { prop_assert_eq!(r.z, 0.0); }
            let untied = variance(x.len(), &[]);
            prop_assert!(r.var_s <= untied);
            let has_ties = (1..x.len()).any(|k| x[..k].contains(&x[k]));
            prop_assert_eq!(r.var_s < untied, has_ties);
            if r.s != 0 {
                prop_assert!(r.z.abs() < r.s.abs() as f64 / r.var_s.sqrt());
            }
        }
    }
}
