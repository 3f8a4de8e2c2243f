//! High-frequency statistics of a sampled sticky diffusion.
//!
//! For observations `X_{i/n}` and a test function `g` vanishing near 0:
//!
//! ```text
//! T1 = (n^a / n) Σ_{i=1}^{[nt]} g_n[T](n^a X_{(i-1)/n})     -> (λ(g) / σ(0)) L_t
//! occupation = (1/n) Σ_{i=1}^{[nt]} 1{X_{(i-1)/n} = 0}        -> Θ_t
//! rho_hat = 2 occupation / ((σ(0) / λ(g)) T1)                  -> ρ
//! ```
//!
//! with `g_n[T](x) = g(n^a T(n^-a x))`. Zero detection is bit-exact equality,
//! which is sound because both simulators emit the sticky point as `0.0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::path::{steps_in, PathSample};
use crate::testfn::{TestFunction, TransformT};

/// Whether `alpha` is covered by the convergence theorem (`alpha < 1/2`) or
/// only by the conjecture checked in the simulations (`1/2 <= alpha < 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Theorem,
    Conjecture,
}

impl Regime {
    pub fn of(alpha: f64) -> Self {
        if alpha < 0.5 {
            Regime::Theorem
        } else {
            Regime::Conjecture
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Theorem => "theorem",
            Regime::Conjecture => "conjecture",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    g: TestFunction,
    transform: TransformT,
    alpha: f64,
    sigma0: f64,
}

impl EstimatorConfig {
    pub fn new(g: TestFunction, transform: TransformT, alpha: f64, sigma0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(sigma0 > 0.0) || !sigma0.is_finite() {
            return Err(invalid(format!("sigma(0) must be positive, got {sigma0}")));
        }
        if lambda_of(&g) == 0.0 {
            return Err(invalid("test function has zero integral"));
        }
        Ok(Self {
            g,
            transform,
            alpha,
            sigma0,
        })
    }

    /// Experiment defaults: `g = 1{1 < |x| < 5} / 8`, identity transform, `sigma(0) = 1`.
    pub fn experiment(alpha: f64) -> Result<Self> {
        Self::new(TestFunction::experiment_default(), TransformT::identity(), alpha, 1.0)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.g.clone(), self.transform.clone(), alpha, self.sigma0)
    }

    pub fn g(&self) -> &TestFunction {
        &self.g
    }

    pub fn transform(&self) -> &TransformT {
        &self.transform
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.alpha)
    }

    /// `sigma(0) / λ(g)`, the factor turning `T1` into a local-time estimate.
    pub fn local_time_scale(&self) -> f64 {
        self.sigma0 / lambda_of(&self.g)
    }
}

/// `λ(g) = ∫ g`.
pub fn lambda_of(g: &TestFunction) -> f64 {
    g.integral()
}

/// `x -> g(s T(x / s))` with `s = n^alpha`.
#[derive(Debug, Clone, Copy)]
pub struct WarpedTestFunction<'a> {
    g: &'a TestFunction,
    transform: &'a TransformT,
    scale: f64,
}

impl WarpedTestFunction<'_> {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if self.transform.is_identity() {
            self.g.eval(x)
        } else {
            self.g.eval(self.scale * self.transform.eval(x / self.scale))
        }
    }
}

pub fn transform_g<'a>(g: &'a TestFunction, transform: &'a TransformT, n: u64, alpha: f64) -> WarpedTestFunction<'a> {
    WarpedTestFunction {
        g,
        transform,
        scale: (n as f64).powf(alpha),
    }
}

/// Raw sums over the first `[nt]` observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSums {
    pub steps: u64,
    /// `Σ g_n[T](n^a X)`.
    pub g_sum: f64,
    /// `Σ 1{X = 0}`.
    pub zeros: u64,
    /// `Σ 1{g_n[T](n^a X) != 0}`.
    pub observed: u64,
}

fn check_time(path: &PathSample, t: f64) -> Result<u64> {
    if !(t >= 0.0) || t > path.horizon() * (1.0 + 1e-12) {
        return Err(invalid(format!("t = {t} outside [0, {}]", path.horizon())));
    }
    Ok(steps_in(path.n(), t).min(path.len() as u64 - 1))
}

pub fn path_sums(path: &PathSample, cfg: &EstimatorConfig, t: f64) -> Result<PathSums> {
    let steps = check_time(path, t)?;
    let n = path.n();
    let s = (n as f64).powf(cfg.alpha);
    let gw = transform_g(&cfg.g, &cfg.transform, n, cfg.alpha);
    let mut sums = PathSums {
        steps,
        g_sum: 0.0,
        zeros: 0,
        observed: 0,
    };
    for &x in &path.values()[..steps as usize] {
        if x == 0.0 {
            sums.zeros += 1;
            continue;
        }
        let v = gw.eval(s * x);
        if v != 0.0 {
            sums.g_sum += v;
            sums.observed += 1;
        }
    }
    Ok(sums)
}

/// `T1`.
pub fn local_time_statistic(path: &PathSample, cfg: &EstimatorConfig, t: f64) -> Result<f64> {
    let sums = path_sums(path, cfg, t)?;
    Ok(t1_of(&sums, path.n(), cfg.alpha))
}

fn t1_of(sums: &PathSums, n: u64, alpha: f64) -> f64 {
    let nf = n as f64;
    nf.powf(alpha) / nf * sums.g_sum
}

/// `(sigma(0) / λ(g)) T1`.
pub fn local_time_estimate(path: &PathSample, cfg: &EstimatorConfig, t: f64) -> Result<f64> {
    Ok(local_time_statistic(path, cfg, t)? * cfg.local_time_scale())
}

pub fn occupation_statistic(path: &PathSample, t: f64) -> Result<f64> {
    let steps = check_time(path, t)? as usize;
    let zeros = path.values()[..steps].iter().filter(|&&x| x == 0.0).count();
    Ok(zeros as f64 / path.n() as f64)
}

/// Fraction of the `n` observations per unit time seen by the inflated test function.
pub fn observed_fraction(path: &PathSample, cfg: &EstimatorConfig, t: f64) -> Result<f64> {
    let sums = path_sums(path, cfg, t)?;
    Ok(sums.observed as f64 / path.n() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub t1: f64,
    pub local_time: f64,
    pub occupation: f64,
    pub rho_hat: Option<f64>,
    pub rejected: bool,
}

impl EstimateRecord {
    /// Assembles a record from `T1`, the occupation statistic and `sigma(0) / λ(g)`.
    pub fn from_parts(t1: f64, occupation: f64, local_time_scale: f64) -> Self {
        let local_time = t1 * local_time_scale;
        if t1 == 0.0 {
            return Self {
                t1,
                local_time,
                occupation,
                rho_hat: None,
                rejected: true,
            };
        }
        Self {
            t1,
            local_time,
            occupation,
            rho_hat: Some(2.0 * occupation / local_time),
            rejected: false,
        }
    }

    pub fn from_sums(sums: &PathSums, n: u64, cfg: &EstimatorConfig) -> Self {
        let t1 = t1_of(sums, n, cfg.alpha);
        let occupation = sums.zeros as f64 / n as f64;
        Self::from_parts(t1, occupation, cfg.local_time_scale())
    }
}

/// Stickiness estimate; a path whose `T1` vanishes yields a rejected record.
pub fn stickiness_estimator(path: &PathSample, cfg: &EstimatorConfig, t: f64) -> Result<EstimateRecord> {
    let sums = path_sums(path, cfg, t)?;
    Ok(EstimateRecord::from_sums(&sums, path.n(), cfg))
}
