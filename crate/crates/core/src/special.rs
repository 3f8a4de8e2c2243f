//! Error-function family and standard normal helpers.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{invalid, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Above this point `erfc` is too close to underflow to be multiplied back up.
const ERFCX_CF_THRESHOLD: f64 = 26.0;

/// Scaled complementary error function `exp(z^2) * erfc(z)` for `z >= 0`.
pub fn erfcx(z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(invalid(format!("erfcx requires z >= 0, got {z}")));
    }
    Ok(erfcx_nonneg(z))
}

/// Unchecked variant for hot paths; the caller guarantees `z >= 0`.
#[inline]
pub(crate) fn erfcx_nonneg(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < ERFCX_CF_THRESHOLD {
        // exp(z^2) with the rounding error of z*z carried separately.
        let zz = z * z;
        let err = z.mul_add(z, -zz);
        libm::exp(zz) * (1.0 + err) * libm::erfc(z)
    } else if z.is_infinite() {
        0.0
    } else {
        // Laplace continued fraction, evaluated backwards.
        let mut f = z;
        for k in (1..=40).rev() {
            f = z + 0.5 * k as f64 / f;
        }
        FRAC_1_SQRT_PI / f
    }
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal distribution function.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2 * FRAC_1_SQRT_PI * libm::exp(-0.5 * z * z)
}

/// Standard normal quantile for `p` in `(0, 1)`.
#[inline]
pub fn norm_quantile(p: f64) -> f64 {
    -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}
