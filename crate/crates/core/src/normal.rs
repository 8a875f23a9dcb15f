//! Standard normal helpers.

use libm::erfc;
use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-tailed p-value of a standard normal score, `2 * (1 - cdf(|z|))`.
pub fn two_tailed_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-tailed critical value: the `z` with `two_tailed_p(z) == alpha`.
pub fn critical_z(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}
