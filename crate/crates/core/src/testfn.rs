//! Test functions `g` and coordinate transforms `T` for the local-time functional.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::quad::{self, QuadOptions};

#[derive(Clone)]
pub enum TestFnKind {
    /// `scale * 1{a < |x| < b}`.
    Band { a: f64, b: f64, scale: f64 },
    Callable {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

/// A bounded integrable function vanishing on `(-vanish_radius, vanish_radius)`.
#[derive(Clone)]
pub struct TestFunction {
    kind: TestFnKind,
    vanish_radius: f64,
    sup_bound: f64,
    integral: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TestFnKind::Band { a, b, scale } => write!(f, "band({a}, {b}, {scale})"),
            TestFnKind::Callable { name, .. } => write!(f, "<callable {name}>"),
        }
    }
}

impl TestFunction {
    pub fn band(a: f64, b: f64, scale: f64) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(invalid(format!("band requires 0 < a < b < inf, got ({a}, {b})")));
        }
        if !scale.is_finite() || scale == 0.0 {
            return Err(invalid(format!("band scale must be finite and nonzero, got {scale}")));
        }
        Ok(Self {
            kind: TestFnKind::Band { a, b, scale },
            vanish_radius: a,
            sup_bound: scale.abs(),
            integral: 2.0 * scale * (b - a),
        })
    }

    /// The test function of the numerical experiments, `1{1 < |x| < 5} / 8`.
    pub fn experiment_default() -> Self {
        Self::band(1.0, 5.0, 0.125).expect("valid constants")
    }

    /// Wraps an arbitrary function. Its integral is computed by quadrature
    /// outside the vanishing interval; `decay_scale` is the width over which
    /// `f` decays at infinity (used by the quadrature map).
    pub fn callable(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        vanish_radius: f64,
        sup_bound: f64,
        decay_scale: f64,
    ) -> Result<Self> {
        if !(vanish_radius > 0.0) || !(sup_bound > 0.0) || !(decay_scale > 0.0) {
            return Err(invalid(
                "callable test function needs positive vanish_radius, sup_bound and decay_scale",
            ));
        }
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        for k in 0..=200 {
            let x = vanish_radius * (k as f64 / 100.0 - 1.0) * (1.0 - 1e-9);
            let v = f(x);
            if v != 0.0 {
                return Err(invalid(format!(
                    "test function is {v} at {x}, inside the vanishing radius {vanish_radius}"
                )));
            }
        }
        let opts = QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_panels: 8000,
        };
        let hi = quad::integrate_upper(|x| f(x), vanish_radius, decay_scale, opts)?;
        let lo = quad::integrate_lower(|x| f(x), -vanish_radius, decay_scale, opts)?;
        Ok(Self {
            kind: TestFnKind::Callable {
                name: name.into(),
                f,
            },
            vanish_radius,
            sup_bound,
            integral: hi.value + lo.value,
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            TestFnKind::Band { a, b, scale } => {
                let ax = x.abs();
                if *a < ax && ax < *b {
                    *scale
                } else {
                    0.0
                }
            }
            TestFnKind::Callable { f, .. } => f(x),
        }
    }

    pub fn kind(&self) -> &TestFnKind {
        &self.kind
    }

    pub fn vanish_radius(&self) -> f64 {
        self.vanish_radius
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Lebesgue integral of `g` over the real line.
    pub fn integral(&self) -> f64 {
        self.integral
    }
}

#[derive(Clone)]
pub enum TransformKind {
    Identity,
    /// `T(x) = x + delta * (1 - cos x)`, valid for `|delta| < 1`.
    Cosine { delta: f64 },
    Callable {
        name: String,
        t: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        dt: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

/// A coordinate warp with `T(0) = 0`, `T'(0) = 1`, `eps <= T' <= 1/eps` and
/// `|T''| <= 1/eps`.
#[derive(Clone)]
pub struct TransformT {
    kind: TransformKind,
    epsilon: f64,
}

impl fmt::Debug for TransformT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TransformKind::Identity => write!(f, "identity"),
            TransformKind::Cosine { delta } => write!(f, "cosine({delta})"),
            TransformKind::Callable { name, .. } => write!(f, "<callable {name}>"),
        }?;
        write!(f, " [eps={}]", self.epsilon)
    }
}

/// Probe lattice: 500 log-spaced magnitudes in `[1e-6, 1e6]`, both signs.
pub fn probe_lattice() -> Vec<f64> {
    let half = 500;
    let mut pts = Vec::with_capacity(2 * half);
    for k in 0..half {
        let e = -6.0 + 12.0 * k as f64 / (half - 1) as f64;
        let x = 10f64.powf(e);
        pts.push(-x);
        pts.push(x);
    }
    pts.sort_by(f64::total_cmp);
    pts
}

impl TransformT {
    pub fn identity() -> Self {
        Self {
            kind: TransformKind::Identity,
            epsilon: 1.0,
        }
    }

    pub fn cosine(delta: f64) -> Result<Self> {
        if !(delta.abs() < 1.0) {
            return Err(invalid(format!("cosine transform needs |delta| < 1, got {delta}")));
        }
        let d = delta.abs();
        let mut epsilon = (1.0 - d).min(1.0 / (1.0 + d));
        if d > 0.0 {
            epsilon = epsilon.min(1.0 / d);
        }
        let t = Self {
            kind: TransformKind::Cosine { delta },
            epsilon,
        };
        t.probe()?;
        Ok(t)
    }

    pub fn callable(
        name: impl Into<String>,
        t: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dt: impl Fn(f64) -> f64 + Send + Sync + 'static,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        let tr = Self {
            kind: TransformKind::Callable {
                name: name.into(),
                t: Arc::new(t),
                dt: Arc::new(dt),
            },
            epsilon,
        };
        tr.probe()?;
        Ok(tr)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            TransformKind::Identity => x,
            TransformKind::Cosine { delta } => x + delta * (1.0 - x.cos()),
            TransformKind::Callable { t, .. } => t(x),
        }
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        match &self.kind {
            TransformKind::Identity => 1.0,
            TransformKind::Cosine { delta } => 1.0 + delta * x.sin(),
            TransformKind::Callable { dt, .. } => dt(x),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kind(&self) -> &TransformKind {
        &self.kind
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, TransformKind::Identity)
    }

    /// Checks the transform conditions on [`probe_lattice`], with `T''`
    /// estimated by central differences of `T'`.
    pub fn probe(&self) -> Result<()> {
        let eps = self.epsilon;
        let slack = 1e-12;
        if self.eval(0.0).abs() > 1e-12 {
            return Err(invalid(format!("T(0) = {} != 0", self.eval(0.0))));
        }
        if (self.deriv(0.0) - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("T'(0) = {} != 1", self.deriv(0.0))));
        }
        for x in probe_lattice() {
            let d = self.deriv(x);
            if !(d >= eps - slack && d <= 1.0 / eps + slack) {
                return Err(invalid(format!("T'({x}) = {d} outside [{eps}, {}]", 1.0 / eps)));
            }
            let h = 1e-4 * x.abs().max(1.0);
            let d2 = (self.deriv(x + h) - self.deriv(x - h)) / (2.0 * h);
            if d2.abs() > 1.0 / eps * (1.0 + 1e-6) + 1e-9 {
                return Err(invalid(format!("|T''({x})| ~ {} exceeds {}", d2.abs(), 1.0 / eps)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_band_properties() {
        let g = TestFunction::experiment_default();
        assert_eq!(g.integral(), 1.0);
        assert_eq!(g.vanish_radius(), 1.0);
        for k in 0..=100 {
            let x = -1.0 + 2.0 * k as f64 / 100.0;
            assert_eq!(g.eval(x), 0.0);
        }
        assert_eq!(g.eval(1.5), 0.125);
        assert_eq!(g.eval(-4.99), 0.125);
        assert_eq!(g.eval(5.0), 0.0);
    }

    #[test]
    fn band_validation() {
        assert!(TestFunction::band(0.0, 1.0, 1.0).is_err());
        assert!(TestFunction::band(2.0, 1.0, 1.0).is_err());
        assert!(TestFunction::band(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn callable_integral_by_quadrature() {
        // 1{1<|x|<2} written as a closure.
        let g = TestFunction::callable(
            "band12",
            |x: f64| if x.abs() > 1.0 && x.abs() < 2.0 { 1.0 } else { 0.0 },
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        assert!((g.integral() - 2.0).abs() < 1e-8, "{}", g.integral());
        // Gaussian tails outside (-1/2, 1/2).
        let h = TestFunction::callable(
            "gauss",
            |x: f64| if x.abs() > 0.5 { (-x * x).exp() } else { 0.0 },
            0.5,
            1.0,
            1.0,
        )
        .unwrap();
        let want = std::f64::consts::PI.sqrt() * libm::erfc(0.5);
        assert!((h.integral() - want).abs() < 1e-9);
    }

    #[test]
    fn callable_must_vanish_near_zero() {
        assert!(TestFunction::callable("bad", |x: f64| x, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn identity_passes_probes() {
        let t = TransformT::identity();
        t.probe().unwrap();
        for x in probe_lattice() {
            assert_eq!(t.eval(x), x);
            assert_eq!(t.deriv(x), 1.0);
        }
        assert_eq!(probe_lattice().len(), 1000);
    }

    #[test]
    fn cosine_transform() {
        let t = TransformT::cosine(0.5).unwrap();
        assert_eq!(t.eval(0.0), 0.0);
        assert_eq!(t.deriv(0.0), 1.0);
        assert!(TransformT::cosine(1.0).is_err());
    }

    #[test]
    fn callable_transform_probe_failures() {
        // T'(0) = 2.
        assert!(TransformT::callable("x2", |x| 2.0 * x, |_| 2.0, 0.4).is_err());
        // T' = 1 + x^2/10 is unbounded.
        assert!(TransformT::callable("cubic", |x| x + x * x * x / 30.0, |x| 1.0 + x * x / 10.0, 0.1).is_err());
        // T'(0) = 1.25.
        let bad = TransformT::callable("shift", |x: f64| x + 0.25 * x.sin(), |x: f64| 1.0 + 0.25 * x.cos(), 0.5);
        assert!(bad.is_err());
        let ok = TransformT::callable("soft", |x: f64| x + 0.25 * x.sin() * x.sin(), |x: f64| 1.0 + 0.25 * (2.0 * x).sin(), 0.5);
        assert!(ok.is_ok());
    }
}
