//! Real functions used as drift and diffusivity coefficients.
//!
//! Descriptors (`const`, `poly`, `ou`) round-trip through their text form so
//! a configuration file fully determines an experiment. Arbitrary closures
//! are accepted through [`RealFn::callable`] but have no text form.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Clone)]
pub enum RealFn {
    Const(f64),
    /// Coefficients in increasing degree: `c0 + c1 x + c2 x^2 + ...`.
    Poly(Vec<f64>),
    /// Mean-reverting drift `kappa * (mean - x)`.
    Ou { kappa: f64, mean: f64 },
    Callable {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl RealFn {
    pub fn callable(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RealFn::Callable {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RealFn::Const(c) => *c,
            RealFn::Poly(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
            RealFn::Ou { kappa, mean } => kappa * (mean - x),
            RealFn::Callable { f, .. } => f(x),
        }
    }

    /// True when the descriptor is identically zero. Callables are never
    /// assumed to be zero.
    pub fn is_zero(&self) -> bool {
        match self {
            RealFn::Const(c) => *c == 0.0,
            RealFn::Poly(c) => c.iter().all(|&ci| ci == 0.0),
            RealFn::Ou { kappa, .. } => *kappa == 0.0,
            RealFn::Callable { .. } => false,
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            RealFn::Const(c) => Some(*c),
            RealFn::Poly(c) if c.iter().skip(1).all(|&ci| ci == 0.0) => {
                Some(c.first().copied().unwrap_or(0.0))
            }
            RealFn::Ou { kappa, .. } if *kappa == 0.0 => Some(0.0),
            _ => None,
        }
    }

    /// Text form, if this function has one.
    pub fn descriptor(&self) -> Option<String> {
        match self {
            RealFn::Callable { .. } => None,
            other => Some(other.to_string()),
        }
    }
}

impl fmt::Display for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealFn::Const(c) => write!(f, "const:{c}"),
            RealFn::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            RealFn::Ou { kappa, mean } => write!(f, "ou:{kappa},{mean}"),
            RealFn::Callable { name, .. } => write!(f, "<callable {name}>"),
        }
    }
}

impl fmt::Debug for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFnError(pub String);

impl fmt::Display for ParseFnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cannot parse function descriptor `{}` (expected a number, const:c, poly:c0,c1,..., or ou:kappa,mean)",
            self.0
        )
    }
}

impl std::error::Error for ParseFnError {}

fn parse_list(s: &str, whole: &str) -> Result<Vec<f64>, ParseFnError> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| ParseFnError(whole.to_string()))
}

impl FromStr for RealFn {
    type Err = ParseFnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(c) = s.parse::<f64>() {
            return Ok(RealFn::Const(c));
        }
        let (kind, args) = s.split_once(':').ok_or_else(|| ParseFnError(s.to_string()))?;
        let vals = parse_list(args, s)?;
        match (kind.trim(), vals.as_slice()) {
            ("const", [c]) => Ok(RealFn::Const(*c)),
            ("poly", c) if !c.is_empty() => Ok(RealFn::Poly(c.to_vec())),
            ("ou", [kappa, mean]) => Ok(RealFn::Ou {
                kappa: *kappa,
                mean: *mean,
            }),
            _ => Err(ParseFnError(s.to_string())),
        }
    }
}
