//! The `(mu, sigma, rho)` sticky SDE: `dX = mu(X) dt + sigma(X) dB` away from
//! the sticky point `0`, with speed-measure atom `rho` at `0`.
//!
//! Well-posedness (a unique non-explosive strong solution, the exponential
//! martingale condition on `sigma' - mu/sigma`, and `sigma` continuously
//! differentiable) is a user assumption and is not checked at runtime.

use crate::error::{invalid, Result};
use crate::func::RealFn;

/// Number of points used to probe `sigma > 0` over the domain.
const SIGMA_PROBES: usize = 2001;

#[derive(Debug, Clone)]
pub struct StickyModel {
    mu: RealFn,
    sigma: RealFn,
    rho: f64,
    domain: (f64, f64),
}

impl StickyModel {
    pub fn new(mu: RealFn, sigma: RealFn, rho: f64, domain: (f64, f64)) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(invalid(format!("stickiness must be finite and >= 0, got {rho}")));
        }
        let (lo, hi) = domain;
        if !(lo < 0.0 && 0.0 < hi) {
            return Err(invalid(format!(
                "domain ({lo}, {hi}) must contain 0 in its interior"
            )));
        }
        let model = Self {
            mu,
            sigma,
            rho,
            domain,
        };
        model.probe_sigma()?;
        Ok(model)
    }

    /// Sticky Brownian motion: `mu = 0`, `sigma = 1` on the real line.
    pub fn sticky_bm(rho: f64) -> Result<Self> {
        Self::new(
            RealFn::Const(0.0),
            RealFn::Const(1.0),
            rho,
            (f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    fn probe_sigma(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        let lo = lo.max(-1e3);
        let hi = hi.min(1e3);
        for k in 0..SIGMA_PROBES {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / SIGMA_PROBES as f64;
            let s = self.sigma.eval(x);
            if !(s > 0.0) || !s.is_finite() {
                return Err(invalid(format!("sigma({x}) = {s} is not positive")));
            }
        }
        let s0 = self.sigma.eval(0.0);
        if !(s0 > 0.0) {
            return Err(invalid(format!("sigma(0) = {s0} is not positive")));
        }
        Ok(())
    }

    pub fn mu(&self) -> &RealFn {
        &self.mu
    }

    pub fn sigma(&self) -> &RealFn {
        &self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.mu.clone(), self.sigma.clone(), rho, self.domain)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.domain.0 < x && x < self.domain.1
    }

    /// True for the sticky Brownian motion (zero drift, unit diffusivity).
    pub fn is_sticky_bm(&self) -> bool {
        self.mu.is_zero() && self.sigma.constant_value() == Some(1.0)
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma.eval(0.0)
    }
}
