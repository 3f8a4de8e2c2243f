//! Scale function, speed measure, exit probabilities and expected exit times
//! of a `(mu, sigma, rho)` sticky SDE.
//!
//! ```text
//! s'(x) = exp(-∫_0^x 2 mu / sigma^2),   s(0) = 0
//! m(dx) = 2 / (s'(x) sigma(x)^2) dx + rho δ0(dx)
//! P_x(tau_b < tau_a) = (s(x) - s(a)) / (s(b) - s(a))
//! E_x(tau_ab) = ∫_(a,b) (s(x∧y) - s(a)) (s(b) - s(x∨y)) / (s(b) - s(a)) m(dy)
//! ```
//!
//! Exit quantities only depend on `s` up to an affine map, so each cell is
//! evaluated with a scale anchored inside the cell (at 0 when the cell
//! contains the sticky point, otherwise at `a`). This keeps the nested
//! quadrature local and the cost of a whole grid linear in its size.
//! The atom contributes only when `a < 0 < b`; an atom sitting on an
//! endpoint is excluded.

use crate::error::{invalid, Error, Result};
use crate::kernel::ATOM_MASS_PER_RHO;
use crate::model::StickyModel;
use crate::quad::{self, QuadOptions};

fn opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_panels: 2000,
    }
}

/// Scale function of `model` normalised by `s'(anchor) = 1`, `s(anchor) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct AnchoredScale<'m> {
    model: &'m StickyModel,
    anchor: f64,
    driftless: bool,
}

impl<'m> AnchoredScale<'m> {
    pub fn new(model: &'m StickyModel, anchor: f64) -> Self {
        Self {
            model,
            anchor,
            driftless: model.mu().is_zero(),
        }
    }

    fn log_deriv_integrand(&self, u: f64) -> f64 {
        let s = self.model.sigma().eval(u);
        2.0 * self.model.mu().eval(u) / (s * s)
    }

    /// `∫_anchor^u 2 mu / sigma^2`.
    pub fn inner(&self, u: f64) -> Result<f64> {
        if self.driftless || u == self.anchor {
            return Ok(0.0);
        }
        Ok(quad::integrate(|v| self.log_deriv_integrand(v), self.anchor, u, opts())?.value)
    }

    pub fn deriv(&self, u: f64) -> Result<f64> {
        Ok((-self.inner(u)?).exp())
    }

    pub fn value(&self, y: f64) -> Result<f64> {
        if self.driftless {
            return Ok(y - self.anchor);
        }
        if y == self.anchor {
            return Ok(0.0);
        }
        // The outer integrand cannot return errors, so the first inner
        // failure is stashed and reported afterwards.
        let mut failure: Option<Error> = None;
        let est = quad::integrate(
            |u| match self.deriv(u) {
                Ok(d) => d,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            self.anchor,
            y,
            opts(),
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(est.value),
        }
    }

    /// Continuous speed density `2 / (s'(y) sigma(y)^2)` under this anchoring.
    pub fn speed_density(&self, y: f64) -> Result<f64> {
        let s = self.model.sigma().eval(y);
        Ok(2.0 / (self.deriv(y)? * s * s))
    }
}

fn check_in_domain(model: &StickyModel, x: f64) -> Result<()> {
    if !model.contains(x) {
        let (lo, hi) = model.domain();
        return Err(invalid(format!("{x} lies outside the state interval ({lo}, {hi})")));
    }
    Ok(())
}

/// `s(x)` with base point 0.
pub fn scale_function(model: &StickyModel, x: f64) -> Result<f64> {
    check_in_domain(model, x)?;
    AnchoredScale::new(model, 0.0).value(x)
}

/// `s'(x)` with `s'(0) = 1`.
pub fn scale_derivative(model: &StickyModel, x: f64) -> Result<f64> {
    check_in_domain(model, x)?;
    AnchoredScale::new(model, 0.0).deriv(x)
}

/// Density of the continuous part of the speed measure, `2 / (s'(x) sigma(x)^2)`.
pub fn speed_density(model: &StickyModel, x: f64) -> Result<f64> {
    check_in_domain(model, x)?;
    AnchoredScale::new(model, 0.0).speed_density(x)
}

/// Exit of the cell `(a, b)` from `x`.
#[derive(Debug, Clone, Copy)]
pub struct ExitProblem<'m> {
    pub model: &'m StickyModel,
    pub a: f64,
    pub x: f64,
    pub b: f64,
}

impl<'m> ExitProblem<'m> {
    pub fn new(model: &'m StickyModel, a: f64, x: f64, b: f64) -> Result<Self> {
        if !(a < b) || !(a <= x && x <= b) {
            return Err(invalid(format!("exit problem needs a <= x <= b with a < b; got ({a}, {x}, {b})")));
        }
        check_in_domain(model, a)?;
        check_in_domain(model, b)?;
        Ok(Self { model, a, x, b })
    }

    fn contains_sticky_point(&self) -> bool {
        self.a < 0.0 && 0.0 < self.b
    }

    fn scale(&self) -> AnchoredScale<'m> {
        let anchor = if self.contains_sticky_point() { 0.0 } else { self.a };
        AnchoredScale::new(self.model, anchor)
    }
}

/// Cell values of the scale function at `a`, `x`, `b`.
struct CellScale {
    sa: f64,
    sx: f64,
    sb: f64,
}

fn cell_scale(p: &ExitProblem<'_>, s: &AnchoredScale<'_>) -> Result<CellScale> {
    let cs = CellScale {
        sa: s.value(p.a)?,
        sx: s.value(p.x)?,
        sb: s.value(p.b)?,
    };
    if !(cs.sb > cs.sa) {
        return Err(invalid(format!(
            "degenerate scale on ({}, {}): s(b) - s(a) = {}",
            p.a,
            p.b,
            cs.sb - cs.sa
        )));
    }
    Ok(cs)
}

/// `P_x(tau_b < tau_a)`.
pub fn exit_up_probability(p: &ExitProblem<'_>) -> Result<f64> {
    let s = p.scale();
    let cs = cell_scale(p, &s)?;
    Ok(((cs.sx - cs.sa) / (cs.sb - cs.sa)).clamp(0.0, 1.0))
}

/// The atom's share of `E_x(tau_ab)` per unit stickiness: the Green kernel at
/// `y = 0` times the atom constant. Zero unless `a < 0 < b`.
pub fn atom_weight(p: &ExitProblem<'_>) -> Result<f64> {
    if !p.contains_sticky_point() {
        return Ok(0.0);
    }
    let s = p.scale();
    let cs = cell_scale(p, &s)?;
    let s0: f64 = 0.0; // anchored at the sticky point
    let green = (s0.min(cs.sx) - cs.sa) * (cs.sb - s0.max(cs.sx)) / (cs.sb - cs.sa);
    Ok(ATOM_MASS_PER_RHO * green)
}

/// `E_x(tau_ab)`, the continuous part by quadrature plus the atom term.
pub fn expected_exit_time(p: &ExitProblem<'_>) -> Result<f64> {
    let s = p.scale();
    let cs = cell_scale(p, &s)?;
    let span = cs.sb - cs.sa;
    let mut failure: Option<Error> = None;
    let mut guard = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    // Left of x the Green kernel is (s(y) - s(a)) (s(b) - s(x)) / span.
    let left = if p.x > p.a {
        quad::integrate(
            |y| {
                let sy = guard(s.value(y));
                let m = guard(s.speed_density(y));
                (sy - cs.sa) * (cs.sb - cs.sx) / span * m
            },
            p.a,
            p.x,
            opts(),
        )?
        .value
    } else {
        0.0
    };
    let right = if p.b > p.x {
        quad::integrate(
            |y| {
                let sy = guard(s.value(y));
                let m = guard(s.speed_density(y));
                (cs.sx - cs.sa) * (cs.sb - sy) / span * m
            },
            p.x,
            p.b,
            opts(),
        )?
        .value
    } else {
        0.0
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let atom = p.model.rho() * atom_weight(p)?;
    Ok(left + right + atom)
}
