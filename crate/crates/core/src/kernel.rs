//! Transition law of the sticky Brownian motion with stickiness `rho`.
//!
//! The process has scale `s(x) = x` and speed measure `m(dy) = 2 dy + rho δ0(dy)`.
//! With `w = |x| + |y|` the classical decomposition reads
//!
//! ```text
//! u1 = exp(-(x-y)^2 / 2t) / sqrt(2 pi t)
//! u2 = exp(-w^2 / 2t)     / sqrt(2 pi t)
//! v  = (2/rho) exp(4w/rho + 8t/rho^2) erfc(w/sqrt(2t) + 2 sqrt(2t)/rho)
//! ```
//!
//! and `u1 - u2 + v` is a density against `dy + (rho/2) δ0(dy)`, i.e. against
//! half the speed measure. [`kernel_density`] therefore returns
//! `(u1 - u2 + v) / 2`, the density against `m` itself, and the atom of `m`
//! is `ATOM_MASS_PER_RHO * rho` with `ATOM_MASS_PER_RHO = 1`.
//!
//! `v` is never formed literally: `exp(4w/rho + 8t/rho^2) erfc(z)` equals
//! `erfcx(z) exp(-w^2/2t)` exactly, which neither overflows nor underflows.
//!
//! The distribution function has the closed form
//!
//! ```text
//! F(y) = Phi((y - x)/sqrt t) + sgn(y) E(|x| + |y|) / 2,   sgn(0) = +1,
//! E(w) = erfcx(w/sqrt(2t) + 2 sqrt(2t)/rho) exp(-w^2/2t),
//! ```
//!
//! whose jump at `0` is `E(|x|) = rho * kernel_density(t, x, 0)`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad::{self, QuadOptions};
use crate::rng::RandomSource;
use crate::special::{erfcx_nonneg, norm_cdf, norm_quantile};

/// Atom of the speed measure per unit stickiness: `m({0}) = ATOM_MASS_PER_RHO * rho`.
pub const ATOM_MASS_PER_RHO: f64 = 1.0;

/// Distance from 0, in units of `sqrt(t)`, beyond which the sticky
/// correction to the CDF is below `exp(-40)` and steps are plain Gaussian.
const FAR_FROM_ZERO: f64 = 9.0;

/// Initial half-width of the root bracket, in units of `sqrt(t)`.
const BRACKET_START: f64 = 10.0;
const MAX_BRACKET_DOUBLINGS: usize = 60;
const MAX_ROOT_ITERATIONS: usize = 200;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub rho: f64,
}

impl KernelQuery {
    pub fn new(t: f64, x: f64, y: f64, rho: f64) -> Result<Self> {
        check_time_rho(t, rho)?;
        if !x.is_finite() || !y.is_finite() {
            return Err(invalid(format!("kernel arguments must be finite: x={x}, y={y}")));
        }
        Ok(Self { t, x, y, rho })
    }
}

fn check_time_rho(t: f64, rho: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("elapsed time must be positive, got {t}")));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid(format!("stickiness must be positive, got {rho}")));
    }
    Ok(())
}

/// The three terms of the decomposition, as densities against `dy + (rho/2) δ0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParts {
    pub u1: f64,
    pub u2: f64,
    pub v: f64,
}

impl KernelParts {
    pub fn total(&self) -> f64 {
        self.u1 - self.u2 + self.v
    }
}

#[inline]
fn sticky_tail(t: f64, rho: f64, w: f64) -> f64 {
    let s2t = (2.0 * t).sqrt();
    let z = w / s2t + 2.0 * s2t / rho;
    erfcx_nonneg(z) * (-w * w / (2.0 * t)).exp()
}

pub fn kernel_parts(q: &KernelQuery) -> KernelParts {
    let KernelQuery { t, x, y, rho } = *q;
    let norm = 1.0 / (2.0 * PI * t).sqrt();
    let w = x.abs() + y.abs();
    KernelParts {
        u1: norm * (-(x - y).powi(2) / (2.0 * t)).exp(),
        u2: norm * (-w * w / (2.0 * t)).exp(),
        v: 2.0 / rho * sticky_tail(t, rho, w),
    }
}

/// `u1 - u2 + v` evaluated without cancellation: `u1 - u2 = u1 (1 - exp(-(|xy| + xy)/t))`.
#[inline]
fn lebesgue_density(t: f64, x: f64, y: f64, rho: f64) -> f64 {
    let norm = 1.0 / (2.0 * PI * t).sqrt();
    let cross = ((x * y).abs() + x * y) / t;
    let u1 = norm * (-(x - y).powi(2) / (2.0 * t)).exp();
    let diff = if cross == 0.0 { 0.0 } else { -u1 * (-cross).exp_m1() };
    diff + 2.0 / rho * sticky_tail(t, rho, x.abs() + y.abs())
}

/// Transition density with respect to the speed measure `2 dy + rho δ0(dy)`.
pub fn kernel_density(q: &KernelQuery) -> f64 {
    0.5 * lebesgue_density(q.t, q.x, q.y, q.rho)
}

/// Convenience wrapper validating the arguments.
pub fn density(t: f64, x: f64, y: f64, rho: f64) -> Result<f64> {
    Ok(kernel_density(&KernelQuery::new(t, x, y, rho)?))
}

/// `kernel_density * sqrt(2 pi t) * exp((x-y)^2 / 2t)`, computed in closed
/// form so the Gaussian factor never overflows.
pub fn gaussian_ratio(q: &KernelQuery) -> f64 {
    let KernelQuery { t, x, y, rho } = *q;
    let cross = ((x * y).abs() + x * y) / t;
    let w = x.abs() + y.abs();
    let s2t = (2.0 * t).sqrt();
    let z = w / s2t + 2.0 * s2t / rho;
    let continuous = -(-cross).exp_m1();
    let sticky = 2.0 / rho * (2.0 * PI * t).sqrt() * erfcx_nonneg(z) * (-cross).exp();
    0.5 * (continuous + sticky)
}

/// Mass of the speed-measure atom at 0.
pub fn atom_mass(rho: f64) -> f64 {
    ATOM_MASS_PER_RHO * rho
}

/// Precomputed law of `X_{s+t}` given `X_s`, for repeated use at a fixed `(t, rho)`.
#[derive(Debug, Clone, Copy)]
pub struct TransitionSampler {
    t: f64,
    rho: f64,
    sqrt_t: f64,
}

impl TransitionSampler {
    pub fn new(t: f64, rho: f64) -> Result<Self> {
        check_time_rho(t, rho)?;
        Ok(Self {
            t,
            rho,
            sqrt_t: t.sqrt(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    fn tail(&self, w: f64) -> f64 {
        sticky_tail(self.t, self.rho, w)
    }

    /// `F(y)` on `y < 0`, extended continuously to `y = 0` (the left limit).
    #[inline]
    fn cdf_neg(&self, x: f64, y: f64) -> f64 {
        norm_cdf((y - x) / self.sqrt_t) - 0.5 * self.tail(x.abs() - y)
    }

    /// `F(y)` on `y >= 0`.
    #[inline]
    fn cdf_pos(&self, x: f64, y: f64) -> f64 {
        norm_cdf((y - x) / self.sqrt_t) + 0.5 * self.tail(x.abs() + y)
    }

    /// Right-continuous distribution function of `X_t` started at `x`.
    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        let f = if y < 0.0 {
            self.cdf_neg(x, y)
        } else {
            self.cdf_pos(x, y)
        };
        f.clamp(0.0, 1.0)
    }

    /// Left limit `F(y-)`; differs from [`cdf`](Self::cdf) only at `y = 0`.
    pub fn cdf_left(&self, x: f64, y: f64) -> f64 {
        if y <= 0.0 {
            self.cdf_neg(x, y).clamp(0.0, 1.0)
        } else {
            self.cdf(x, y)
        }
    }

    /// Probability that `X_t = 0` exactly.
    pub fn atom_probability(&self, x: f64) -> f64 {
        self.tail(x.abs())
    }

    /// Generalized inverse of `F` at `u` in `(0, 1)`: exactly `0.0` on the atom
    /// interval `[F(0-), F(0)]`, otherwise the root of `F(y) = u`.
    pub fn inverse_cdf(&self, x: f64, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(invalid(format!("inverse CDF needs u in (0, 1), got {u}")));
        }
        let st = self.sqrt_t;
        let a = x.abs();
        let gaussian_guess = x + st * norm_quantile(u);
        if a >= FAR_FROM_ZERO * st {
            return Ok(gaussian_guess);
        }
        let base = norm_cdf(-x / st);
        let jump = self.tail(a);
        let left = base - 0.5 * jump;
        let right = base + 0.5 * jump;
        if left <= u && u <= right {
            return Ok(0.0);
        }
        if u < left {
            let anchor = x.min(0.0);
            let mut width = BRACKET_START * st;
            let mut lo = anchor - width;
            let mut doublings = 0;
            while self.cdf_neg(x, lo) >= u {
                doublings += 1;
                if doublings > MAX_BRACKET_DOUBLINGS {
                    return Err(Error::RootBracket(format!(
                        "no lower bracket for u={u} from x={x}, t={}",
                        self.t
                    )));
                }
                width *= 2.0;
                lo = anchor - width;
            }
            self.solve(x, u, lo, 0.0, gaussian_guess, |y| self.cdf_neg(x, y))
        } else {
            let anchor = x.max(0.0);
            let mut width = BRACKET_START * st;
            let mut hi = anchor + width;
            let mut doublings = 0;
            while self.cdf_pos(x, hi) <= u {
                doublings += 1;
                if doublings > MAX_BRACKET_DOUBLINGS {
                    return Err(Error::RootBracket(format!(
                        "no upper bracket for u={u} from x={x}, t={}",
                        self.t
                    )));
                }
                width *= 2.0;
                hi = anchor + width;
            }
            self.solve(x, u, 0.0, hi, gaussian_guess, |y| self.cdf_pos(x, y))
        }
    }

    /// Newton iteration on `F(y) = u` safeguarded by the bracket `[lo, hi]`.
    fn solve(
        &self,
        x: f64,
        u: f64,
        mut lo: f64,
        mut hi: f64,
        guess: f64,
        cdf: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let mut y = if guess > lo && guess < hi {
            guess
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..MAX_ROOT_ITERATIONS {
            let r = cdf(y) - u;
            if r == 0.0 {
                return Ok(y);
            }
            if r < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let slope = lebesgue_density(self.t, x, y, self.rho);
            let mut next = y - r / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= ROOT_TOL || hi - lo <= ROOT_TOL {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::RootBracket(format!(
            "root of F(y) = {u} from x={x} not resolved within [{lo}, {hi}]"
        )))
    }

    pub fn sample(&self, x: f64, rng: &mut RandomSource) -> Result<f64> {
        self.inverse_cdf(x, rng.uniform_open())
    }
}

/// Distribution function `F(y) = P_x(X_t <= y)`.
pub fn transition_cdf(t: f64, x: f64, y: f64, rho: f64) -> Result<f64> {
    KernelQuery::new(t, x, y, rho)?;
    Ok(TransitionSampler::new(t, rho)?.cdf(x, y))
}

/// Left limit `P_x(X_t < y)`.
pub fn transition_cdf_left(t: f64, x: f64, y: f64, rho: f64) -> Result<f64> {
    KernelQuery::new(t, x, y, rho)?;
    Ok(TransitionSampler::new(t, rho)?.cdf_left(x, y))
}

/// One exact draw of `X_t` given `X_0 = x`.
pub fn sample_transition(t: f64, x: f64, rho: f64, rng: &mut RandomSource) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("start point must be finite, got {x}")));
    }
    TransitionSampler::new(t, rho)?.sample(x, rng)
}

/// The distribution function by direct quadrature of [`kernel_density`]
/// against the speed measure. Slow; used to cross-check the closed form.
pub fn transition_cdf_by_quadrature(t: f64, x: f64, y: f64, rho: f64) -> Result<f64> {
    KernelQuery::new(t, x, y, rho)?;
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 0.0,
        max_panels: 4000,
    };
    let scale = t.sqrt();
    let dens = |u: f64| 2.0 * kernel_density(&KernelQuery { t, x, y: u, rho });
    // Breakpoints where the integrand has kinks or its bulk: 0 and x.
    let mut cuts = vec![0.0, x];
    cuts.retain(|&c| c < y);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let first = cuts.first().copied().unwrap_or(y);
    let mut total = quad::integrate_lower(dens, first, scale, opts)?.value;
    let mut prev = first;
    for &c in cuts.iter().skip(1).chain(std::iter::once(&y)) {
        if c > prev {
            total += quad::integrate(dens, prev, c, opts)?.value;
            prev = c;
        }
    }
    if y >= 0.0 {
        total += atom_mass(rho) * kernel_density(&KernelQuery { t, x, y: 0.0, rho });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    fn q(t: f64, x: f64, y: f64, rho: f64) -> KernelQuery {
        KernelQuery::new(t, x, y, rho).unwrap()
    }

    #[test]
    fn rejects_invalid_queries() {
        assert!(KernelQuery::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(KernelQuery::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(KernelQuery::new(-1.0, 0.0, 0.0, 1.0).is_err());
        assert!(KernelQuery::new(1.0, f64::NAN, 0.0, 1.0).is_err());
        assert!(transition_cdf(1.0, 0.0, 0.0, -1.0).is_err());
        assert!(TransitionSampler::new(1.0, 1.0).unwrap().inverse_cdf(0.0, 1.0).is_err());
    }

    #[test]
    fn origin_value() {
        // u1 = u2 at x = y = 0, so the density is v/2 = erfcx(2 sqrt 2).
        let parts = kernel_parts(&q(1.0, 0.0, 0.0, 1.0));
        assert_eq!(parts.u1, parts.u2);
        let erfcx_2sqrt2 = 0.188_821_282_603_937_873_342_047_806_688_1;
        assert!((parts.v - 2.0 * erfcx_2sqrt2).abs() < 1e-14);
        assert!((kernel_density(&q(1.0, 0.0, 0.0, 1.0)) - erfcx_2sqrt2).abs() < 1e-14);
    }

    #[test]
    fn stable_form_matches_literal_where_representable() {
        for &(t, x, y, rho) in &[(1.0, 0.3, -0.2, 1.0), (0.5, 1.0, 2.0, 2.0), (2.0, -1.0, -0.5, 0.7)] {
            let w: f64 = f64::abs(x) + f64::abs(y);
            let lit = 2.0 / rho
                * (4.0 * w / rho + 8.0 * t / (rho * rho)).exp()
                * libm::erfc(w / (2.0f64 * t).sqrt() + 2.0 * (2.0f64 * t).sqrt() / rho);
            let parts = kernel_parts(&q(t, x, y, rho));
            assert!(((parts.v - lit) / lit).abs() < 1e-12);
            assert!((kernel_density(&q(t, x, y, rho)) - 0.5 * parts.total()).abs() < 1e-15);
        }
    }

    #[test]
    fn finite_in_extreme_regimes() {
        for &(t, rho) in &[(1e-8, 1e-6), (100.0, 1e-3), (1e3, 1e6), (1e-6, 1e8)] {
            for &x in &[0.0, 1e-3, 5.0, -40.0] {
                let d = kernel_density(&q(t, x, 0.1, rho));
                assert!(d.is_finite() && d >= 0.0, "t={t} rho={rho} x={x}: {d}");
            }
        }
    }

    #[test]
    fn cdf_jump_equals_atom() {
        for &(t, x, rho) in &[(1.0, 0.0, 1.0), (0.3, 0.5, 2.0), (2.0, -1.5, 0.25)] {
            let s = TransitionSampler::new(t, rho).unwrap();
            let jump = s.cdf(x, 0.0) - s.cdf_left(x, 0.0);
            let atom = atom_mass(rho) * kernel_density(&q(t, x, 0.0, rho));
            assert!((jump - atom).abs() < 1e-14, "{jump} vs {atom}");
        }
    }

    #[test]
    fn closed_form_cdf_matches_quadrature() {
        for &(t, x, y, rho) in &[
            (1.0, 0.5, -0.7, 1.0),
            (1.0, 0.5, 0.0, 1.0),
            (0.1, -0.2, 0.3, 0.5),
            (5.0, 2.0, 1.0, 2.0),
            (1.0, 0.0, 2.5, 1.0),
        ] {
            let closed = transition_cdf(t, x, y, rho).unwrap();
            let numeric = transition_cdf_by_quadrature(t, x, y, rho).unwrap();
            assert!((closed - numeric).abs() < 1e-9, "({t},{x},{y},{rho}): {closed} vs {numeric}");
        }
    }

    #[test]
    fn inverse_cdf_hits_the_atom_and_the_roots() {
        let s = TransitionSampler::new(1.0, 1.0).unwrap();
        let x = 0.5;
        let mid = 0.5 * (s.cdf_left(x, 0.0) + s.cdf(x, 0.0));
        assert_eq!(s.inverse_cdf(x, mid).unwrap().to_bits(), 0.0f64.to_bits());
        for &u in &[1e-12, 0.01, 0.2, 0.9, 0.999_999] {
            let y = s.inverse_cdf(x, u).unwrap();
            if y != 0.0 {
                assert!((s.cdf(x, y) - u).abs() < 1e-11, "u={u}: F({y}) = {}", s.cdf(x, y));
            }
        }
    }

    #[test]
    fn far_steps_are_gaussian_quantiles() {
        let s = TransitionSampler::new(1e-4, 1.0).unwrap();
        let y = s.inverse_cdf(1.0, 0.975).unwrap();
        assert!((y - (1.0 + 0.01 * 1.959_963_984_540_054)).abs() < 1e-13);
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut a = derive_stream(9, 4);
        let mut b = derive_stream(9, 4);
        for _ in 0..50 {
            let ya = sample_transition(0.7, 0.1, 1.3, &mut a).unwrap();
            let yb = sample_transition(0.7, 0.1, 1.3, &mut b).unwrap();
            assert_eq!(ya.to_bits(), yb.to_bits());
        }
    }

    #[test]
    fn gaussian_ratio_matches_product() {
        for &(t, x, y, rho) in &[(1.0, 0.3, 0.2, 1.0), (0.5, -1.0, 0.4, 0.1), (3.0, 2.0, 2.5, 5.0)] {
            let qq = q(t, x, y, rho);
            let direct =
                kernel_density(&qq) * (2.0 * PI * t).sqrt() * ((x - y).powi(2) / (2.0 * t)).exp();
            assert!((gaussian_ratio(&qq) - direct).abs() < 1e-12);
        }
    }
}
