//! Getis-Ord Gi* local statistic with binary weights.
//!
//! For an occupied bin `i` with neighbor set `N(i)` (itself included, `m`
//! members) over `n` occupied bins with values `x`:
//!
//! ```text
//! Gi* = (sum_{j in N(i)} x_j - mean * m) / (S * sqrt((n * m - m^2) / (n - 1)))
//! S   = sqrt(sum x_j^2 / n - mean^2)
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::RatioField;
use crate::error::{Error, Result};
use crate::grid::BinIndex;
use crate::normal;
use crate::weights::{Occupancy, Offsets, WeightsSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpotClass {
    Hot,
    Cold,
    NotSignificant,
}

impl SpotClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpotClass::Hot => "hot",
            SpotClass::Cold => "cold",
            SpotClass::NotSignificant => "not_significant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiResult {
    pub bin: BinIndex,
    pub z: f64,
    /// Two-tailed normal p-value of `z`.
    pub p: f64,
    pub spot_class: SpotClass,
}

/// Gi* scores for every occupied bin of a field, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GiField {
    pub results: Vec<GiResult>,
    /// Set when every value in the field was identical; all z are then 0.
    pub degenerate: bool,
    pub alpha: f64,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 0.5 {
        Ok(())
    } else {
        Err(Error::config(format!("alpha must lie in (0, 0.5], got {alpha}")))
    }
}

/// Hot when `z >= z_crit`, Cold when `z <= -z_crit`, where `z_crit` is the
/// two-tailed normal critical value at `alpha`.
pub fn classify_spot(z: f64, alpha: f64) -> SpotClass {
    let crit = normal::critical_z(alpha);
    if z >= crit {
        SpotClass::Hot
    } else if z <= -crit {
        SpotClass::Cold
    } else {
        SpotClass::NotSignificant
    }
}

/// Computes Gi* for every occupied bin of `field`.
pub fn gi_star(field: &RatioField, weights: &WeightsSpec, alpha: f64) -> Result<GiField> {
    check_alpha(alpha)?;
    let n = field.len();
    if n < 2 {
        return Err(Error::TooFewBins(n));
    }
    let x = field.values();
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let s = (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf).sqrt();
    let scale = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    if s <= 1e-12 * scale || s == 0.0 {
        let results = field
            .support()
            .iter()
            .map(|&bin| GiResult {
                bin,
                z: 0.0,
                p: 1.0,
                spot_class: SpotClass::NotSignificant,
            })
            .collect();
        return Ok(GiField {
            results,
            degenerate: true,
            alpha,
        });
    }

    let bins = field.support();
    let occ = Occupancy::new(*field.grid(), bins);
    let offsets = Offsets::for_scheme(weights.scheme());
    let crit = normal::critical_z(alpha);

    let results = bins
        .par_iter()
        .map(|&bin| {
            let (m, local_sum) = occ.neighbor_sum(weights, &offsets, bin, x);
            let z = gi_z(local_sum, m as f64, mean, s, nf);
            let spot_class = if z >= crit {
                SpotClass::Hot
            } else if z <= -crit {
                SpotClass::Cold
            } else {
                SpotClass::NotSignificant
            };
            GiResult {
                bin,
                z,
                p: normal::two_tailed_p(z),
                spot_class,
            }
        })
        .collect();

    Ok(GiField {
        results,
        degenerate: false,
        alpha,
    })
}

fn gi_z(local_sum: f64, m: f64, mean: f64, s: f64, n: f64) -> f64 {
    let spread = (n * m - m * m) / (n - 1.0);
    if spread <= 0.0 {
        // every occupied bin is a neighbor; the numerator is zero too
        return 0.0;
    }
    (local_sum - mean * m) / (s * spread.sqrt())
}

/// Benjamini-Hochberg step-up over the p-values of `results`.
///
/// A result keeps its Hot/Cold class only if its p-value is at or below the
/// largest `p_(r)` with `p_(r) <= alpha * r / m`. NotSignificant results stay
/// NotSignificant.
pub fn fdr_correct(results: &[GiResult], alpha: f64) -> Vec<GiResult> {
    let cutoff = bh_cutoff(results.iter().map(|r| r.p), alpha);
    results
        .iter()
        .map(|r| {
            let keep = cutoff.is_some_and(|c| r.p <= c);
            GiResult {
                spot_class: if keep { r.spot_class } else { SpotClass::NotSignificant },
                ..*r
            }
        })
        .collect()
}

/// Largest p-value rejected by the BH procedure, if any.
pub(crate) fn bh_cutoff(p: impl Iterator<Item = f64>, alpha: f64) -> Option<f64> {
    let mut sorted: Vec<f64> = p.collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .rev()
        .find(|(k, p)| **p <= alpha * (*k as f64 + 1.0) / m)
        .map(|(_, p)| *p)
}
