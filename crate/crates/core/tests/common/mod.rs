//! Reference implementations used by the integration tests. They are written
//! from the definitions, favour clarity over speed and share no code with the
//! library.

#![allow(dead_code)]

use emospot::emerging::EmergingPattern;
use emospot::{BinIndex, SpotFlag, Trend};

/// Gi* by brute force over an explicit binary weight matrix for a
/// fixed-distance band measured in bin widths.
pub fn naive_gi_star(bins: &[BinIndex], values: &[f64], radius: f64) -> Vec<f64> {
    let n = bins.len();
    let nf = n as f64;
    let w = |a: BinIndex, b: BinIndex| -> f64 {
        let di = f64::from(a.i) - f64::from(b.i);
        let dj = f64::from(a.j) - f64::from(b.j);
        if (di * di + dj * dj).sqrt() <= radius {
            1.0
        } else {
            0.0
        }
    };
    let mean = values.iter().sum::<f64>() / nf;
    let s = (values.iter().map(|x| x * x).sum::<f64>() / nf - mean * mean).sqrt();
    (0..n)
        .map(|i| {
            let mut wx = 0.0;
            let mut sw = 0.0;
            let mut sw2 = 0.0;
            for j in 0..n {
                let wij = w(bins[i], bins[j]);
                wx += wij * values[j];
                sw += wij;
                sw2 += wij * wij;
            }
            (wx - mean * sw) / (s * ((nf * sw2 - sw * sw) / (nf - 1.0)).sqrt())
        })
        .collect()
}

/// Benjamini-Hochberg by trying every candidate rank.
pub fn bh_survivors(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len() as f64;
    let mut best_threshold = None;
    for (rank, threshold_p) in (1..=p.len()).map(|r| (r, alpha * r as f64 / m)) {
        let at_or_below = p.iter().filter(|&&q| q <= threshold_p).count();
        if at_or_below >= rank {
            best_threshold = Some(threshold_p);
        }
    }
    match best_threshold {
        None => vec![false; p.len()],
        Some(t) => {
            // survivors are the `rank` smallest, i.e. all p at or below the
            // largest p within the threshold
            let cut = p.iter().copied().filter(|&q| q <= t).fold(f64::MIN, f64::max);
            p.iter().map(|&q| q <= cut).collect()
        }
    }
}

/// Mann-Kendall S by the pair loop.
pub fn pair_loop_s(x: &[f64]) -> i64 {
    let mut s = 0;
    for k in 0..x.len() {
        for l in k + 1..x.len() {
            if x[l] > x[k] {
                s += 1;
            } else if x[l] < x[k] {
                s -= 1;
            }
        }
    }
    s
}

/// Emerging pattern rule table, written out one polarity at a time.
pub fn rule_table(flags: &[SpotFlag], trend: Trend) -> EmergingPattern {
    use EmergingPattern::*;
    let data: Vec<SpotFlag> = flags.iter().copied().filter(|f| *f != SpotFlag::NoData).collect();
    if data.is_empty() {
        return NoPattern;
    }
    let n = data.len() as f64;
    let frac = |f: SpotFlag| data.iter().filter(|&&x| x == f).count() as f64 / n;
    let last = *data.last().unwrap();

    let rules = |hot: SpotFlag, cold: SpotFlag, up: Trend, down: Trend| -> [bool; 8] {
        let positions: Vec<usize> = (0..data.len()).filter(|&k| data[k] == hot).collect();
        let ever_cold = data.contains(&cold);
        let final_hot = last == hot;
        let mostly_hot = frac(hot) >= 0.9;
        // start of the final uninterrupted hot run
        let mut run_start = data.len();
        while run_start > 0 && data[run_start - 1] == hot {
            run_start -= 1;
        }
        let run_len = data.len() - run_start;
        let hot_before_run = positions.iter().any(|&k| k < run_start);
        let new = final_hot && positions.len() == 1;
        let consecutive = final_hot && run_len >= 2 && !hot_before_run && !mostly_hot;
        let intensifying = mostly_hot && final_hot && trend == up;
        let persistent = mostly_hot && final_hot && trend == Trend::NoTrend;
        let diminishing = mostly_hot && final_hot && trend == down;
        let historical = mostly_hot && !final_hot;
        let oscillating = final_hot && ever_cold && frac(cold) < 0.9;
        let sporadic = final_hot && !mostly_hot && !ever_cold && hot_before_run;
        [
            new,
            consecutive,
            intensifying,
            persistent,
            diminishing,
            historical,
            oscillating,
            sporadic,
        ]
    };
    let hot = rules(SpotFlag::Hot, SpotFlag::Cold, Trend::Increasing, Trend::Decreasing);
    let cold = rules(SpotFlag::Cold, SpotFlag::Hot, Trend::Decreasing, Trend::Increasing);
    let hot_names = [
        NewHot,
        ConsecutiveHot,
        IntensifyingHot,
        PersistentHot,
        DiminishingHot,
        HistoricalHot,
        OscillatingHot,
        SporadicHot,
    ];
    let cold_names = [
        NewCold,
        ConsecutiveCold,
        IntensifyingCold,
        PersistentCold,
        DiminishingCold,
        HistoricalCold,
        OscillatingCold,
        SporadicCold,
    ];
    for k in 0..8 {
        assert!(!(hot[k] && cold[k]), "both polarities matched rule {k} for {data:?}");
        if hot[k] {
            return hot_names[k];
        }
        if cold[k] {
            return cold_names[k];
        }
    }
    NoPattern
}

/// Two-tailed normal p-value from the positive-term series
/// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum 2^n x^(2n+1) / (2n+1)!!.
pub fn two_tailed_p(z: f64) -> f64 {
    let x = z.abs() / std::f64::consts::SQRT_2;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > sum * 1e-18 {
        n += 1.0;
        term *= 2.0 * x * x / (2.0 * n + 1.0);
        sum += term;
    }
    let erf = 2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum;
    1.0 - erf
}
