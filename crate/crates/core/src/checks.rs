//! Self-check battery for the transition kernel, run by `sticky kernel check`.

use crate::error::Result;
use crate::kernel::{atom_mass, density, gaussian_ratio, transition_cdf, transition_cdf_by_quadrature, transition_cdf_left, KernelQuery};
use crate::quad::{self, QuadOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation.
    pub worst: f64,
    pub tolerance: f64,
}

const OPTS: QuadOptions = QuadOptions {
    abs_tol: 1e-13,
    rel_tol: 1e-12,
    max_panels: 4000,
};

/// `∫ f` over the real line with the given breakpoints.
fn integrate_real(f: impl Fn(f64) -> f64, breaks: &[f64], scale: f64) -> Result<f64> {
    let mut b = breaks.to_vec();
    b.sort_by(f64::total_cmp);
    b.dedup();
    let mut total = quad::integrate_lower(&f, b[0], scale, OPTS)?.value;
    for w in b.windows(2) {
        total += quad::integrate(&f, w[0], w[1], OPTS)?.value;
    }
    Ok(total + quad::integrate_upper(&f, *b.last().unwrap(), scale, OPTS)?.value)
}

fn outcome(name: &'static str, worst: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

fn normalization() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in &[0.1f64, 1.0, 5.0] {
        for &x in &[0.0, 0.5, 2.0] {
            for &rho in &[0.5, 1.0, 2.0] {
                let cont = integrate_real(|y| 2.0 * density(t, x, y, rho).unwrap_or(f64::NAN), &[0.0, x], t.sqrt())?;
                let total = cont + atom_mass(rho) * density(t, x, 0.0, rho)?;
                worst = worst.max((total - 1.0).abs());
            }
        }
    }
    Ok(worst)
}

fn chapman_kolmogorov() -> Result<f64> {
    let pts = [
        (0.3, 0.7, 0.0, 0.0, 1.0),
        (0.5, 1.5, -1.0, 0.5, 0.5),
        (1.0, 0.2, 0.4, -1.2, 2.0),
        (2.0, 1.0, 1.5, 1.5, 0.3),
    ];
    let mut worst: f64 = 0.0;
    for &(s, t, x, y, rho) in &pts {
        let (s, t): (f64, f64) = (s, t);
        let p = |t, a, b| density(t, a, b, rho).unwrap_or(f64::NAN);
        let lhs = integrate_real(|z| 2.0 * p(s, x, z) * p(t, z, y), &[x, 0.0, y], (s + t).sqrt())?
            + atom_mass(rho) * p(s, x, 0.0) * p(t, 0.0, y);
        worst = worst.max((lhs - p(s + t, x, y)).abs());
    }
    Ok(worst)
}

fn scaling() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &c in &[4.0f64, 9.0] {
        for &(t, x, y, rho) in &[(0.5, 0.0, 0.3, 1.0), (0.1, -1.0, 0.0, 0.5), (1.3, 2.0, -0.5, 2.0)] {
            let a = transition_cdf(c * t, x, y, rho)?;
            let b = transition_cdf(t, x / c.sqrt(), y / c.sqrt(), rho / c.sqrt())?;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn atom_jump() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(t, x, rho) in &[(0.1, 0.0, 1.0), (1.0, 0.7, 0.2), (3.0, -2.0, 5.0)] {
        let jump = transition_cdf(t, x, 0.0, rho)? - transition_cdf_left(t, x, 0.0, rho)?;
        worst = worst.max((jump - atom_mass(rho) * density(t, x, 0.0, rho)?).abs());
    }
    Ok(worst)
}

fn cdf_against_quadrature() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(t, x, y, rho) in &[(1.0, 0.0, 0.5, 1.0), (0.2, 1.0, -0.3, 0.4), (2.0, -0.5, 1.0, 3.0)] {
        worst = worst.max((transition_cdf(t, x, y, rho)? - transition_cdf_by_quadrature(t, x, y, rho)?).abs());
    }
    Ok(worst)
}

/// Largest `p √(2πt) e^{(x-y)²/2t}` over a coarse `(t, x, y, rho)` scan.
fn gaussian_bound() -> Result<f64> {
    let mut sup: f64 = 0.0;
    for &rho in &[0.01, 1.0, 100.0] {
        for i in 0..20 {
            let t = 10f64.powf(-3.0 + 4.0 * i as f64 / 19.0);
            for j in 0..20 {
                for k in 0..20 {
                    let (x, y) = (-5.0 + 10.0 * j as f64 / 19.0, -5.0 + 10.0 * k as f64 / 19.0);
                    sup = sup.max(gaussian_ratio(&KernelQuery::new(t, x, y, rho)?));
                }
            }
        }
    }
    Ok(sup)
}

/// Runs every kernel invariant check.
pub fn kernel_battery() -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        outcome("normalization", normalization()?, 1e-6),
        outcome("chapman-kolmogorov", chapman_kolmogorov()?, 1e-4),
        outcome("scaling", scaling()?, 1e-6),
        outcome("atom-jump", atom_jump()?, 1e-14),
        outcome("cdf-vs-quadrature", cdf_against_quadrature()?, 1e-8),
        outcome("gaussian-bound", gaussian_bound()?, 2.0),
    ])
}
