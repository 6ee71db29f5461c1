//! Standard normal density, distribution and quantile functions.
//!
//! Tail values are evaluated in log space once `|x| > 6`, where the direct
//! forms start losing relative precision.

use libm::erfc;
use statrs::function::erf::erfc_inv;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const TAIL: f64 = 6.0;

#[inline]
pub fn pdf(x: f64) -> f64 {
    if x.abs() > TAIL {
        log_pdf(x).exp()
    } else {
        FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
    }
}

#[inline]
pub fn log_pdf(x: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * x * x
}

#[inline]
pub fn cdf(x: f64) -> f64 {
    if x < -TAIL {
        log_cdf(x).exp()
    } else {
        0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// `ln Φ(x)`, accurate deep into the lower tail.
pub fn log_cdf(x: f64) -> f64 {
    if x > TAIL {
        // Φ(x) = 1 - Φ(-x), and Φ(-x) < 1e-9 here
        (-0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)).ln_1p()
    } else if x > -37.0 {
        (0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)).ln()
    } else if x.is_finite() {
        // Mills-ratio asymptotic expansion; erfc underflows past here.
        let z2 = 1.0 / (x * x);
        let series = 1.0 - z2 + 3.0 * z2 * z2 - 15.0 * z2 * z2 * z2;
        log_pdf(x) - (-x).ln() + series.ln()
    } else if x.is_nan() {
        f64::NAN
    } else {
        f64::NEG_INFINITY
    }
}

/// `Φ⁻¹(p)` for `p` in `(0, 1)`; returns `∓∞` at the endpoints.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // the series inverse is good to ~1e-11; Newton steps on the accurate
    // cdf polish it to rounding level
    for _ in 0..2 {
        let step = if p < 0.5 {
            (cdf(x) - p) / pdf(x)
        } else {
            (p - 1.0 + cdf(-x)) / pdf(x)
        };
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}
