//! Standard normal distribution and quantile functions.
//!
//! The CDF uses the musl-derived `erfc` from `libm` (sub-ulp accuracy). The
//! quantile starts from the `statrs` inverse error function and takes one
//! Newton step against that CDF.

use statrs::function::erf::erfc_inv;
use std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, `p` in (0, 1).
pub fn std_normal_quantile(p: f64) -> f64 {
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    let d = std_normal_pdf(x);
    if !x.is_finite() || d < 1e-300 {
        return x;
    }
    // upper tail in complement form to keep relative accuracy
    let step = if x > 0.0 {
        ((1.0 - p) - std_normal_cdf(-x)) / d
    } else {
        (std_normal_cdf(x) - p) / d
    };
    x - step
}
