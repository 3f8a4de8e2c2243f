//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # sticky Brownian motion, one table row
//! model.rho = 1
//! alpha = 0.6
//! n = 20000
//! ```
//!
//! `#` starts a comment. Every key must be one of [`KEYS`]; only `model.rho`
//! is required. Function-valued keys take a descriptor: a bare number,
//! `const:c`, `poly:c0,c1,...` or `ou:kappa,mean`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::error::Result;
use crate::estimators::EstimatorConfig;
use crate::fsutil;
use crate::func::RealFn;
use crate::harness::{GridKind, McConfig, SimulatorKind};
use crate::model::StickyModel;
use crate::testfn::{TestFunction, TransformT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },

    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),

    #[error("missing required key '{0}'")]
    MissingKey(String),

    #[error("line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },

    #[error("invalid value '{value}' for '{key}': {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
}

/// Recognised keys with their defaults (`None` means required).
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("model.mu", Some("0")),
    ("model.sigma", Some("1")),
    ("model.rho", None),
    ("model.lo", Some("-inf")),
    ("model.hi", Some("inf")),
    ("model.x0", Some("0")),
    ("g.kind", Some("band")),
    ("g.a", Some("1")),
    ("g.b", Some("5")),
    ("g.scale", Some("0.125")),
    ("T.kind", Some("identity")),
    ("T.delta", Some("0.5")),
    ("alpha", Some("0.6")),
    ("n", Some("20000")),
    ("horizon", Some("1")),
    ("n_mc", Some("200")),
    ("seed", Some("0")),
    ("simulator", Some("exact")),
    ("grid.kind", Some("recursive")),
    ("grid.h", Some("0.01")),
    ("grid.xmax", Some("10")),
    ("stmca.max_boundary_hits", Some("1000")),
    ("mc.drop_rejected", Some("true")),
    ("estimate.sigma0", Some("model")),
    ("estimate.snap_tol", Some("0")),
];

fn default_of(key: &str) -> std::result::Result<Option<&'static str>, ConfigError> {
    KEYS.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, d)| *d)
        .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> std::result::Result<Self, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.trim().to_string(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.trim().to_string(),
                });
            }
            default_of(k)?;
            if cfg.values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
        }
        Ok(cfg)
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(fsutil::read_to_string(path)?.parse()?)
    }

    /// Sets `key` to `value`, replacing any file value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), ConfigError> {
        default_of(key)?;
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> std::result::Result<(), ConfigError> {
        let (k, v) = spec.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: spec.to_string(),
        })?;
        self.set(k.trim(), v)
    }

    /// Explicit value, else the default; `MissingKey` for an unset required key.
    pub fn get(&self, key: &str) -> std::result::Result<&str, ConfigError> {
        let default = default_of(key)?;
        match self.values.get(key) {
            Some(v) => Ok(v),
            None => default.ok_or_else(|| ConfigError::MissingKey(key.to_string())),
        }
    }

    pub fn parse_key<T: FromStr>(&self, key: &str) -> std::result::Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.get(key)?;
        v.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
            key: key.to_string(),
            value: v.to_string(),
            reason: e.to_string(),
        })
    }

    fn bad(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            key: key.to_string(),
            value: self.get(key).unwrap_or("").to_string(),
            reason: reason.into(),
        }
    }

    /// All keys with their effective values, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, _) in KEYS {
            if let Ok(v) = self.get(k) {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    pub fn model(&self) -> Result<StickyModel> {
        let mu: RealFn = self.parse_key("model.mu")?;
        let sigma: RealFn = self.parse_key("model.sigma")?;
        let rho: f64 = self.parse_key("model.rho")?;
        let lo: f64 = self.parse_key("model.lo")?;
        let hi: f64 = self.parse_key("model.hi")?;
        StickyModel::new(mu, sigma, rho, (lo, hi))
    }

    pub fn x0(&self) -> Result<f64> {
        Ok(self.parse_key("model.x0")?)
    }

    pub fn test_function(&self) -> Result<TestFunction> {
        match self.get("g.kind")? {
            "band" => TestFunction::band(self.parse_key("g.a")?, self.parse_key("g.b")?, self.parse_key("g.scale")?),
            _ => Err(self.bad("g.kind", "expected 'band'").into()),
        }
    }

    pub fn transform(&self) -> Result<TransformT> {
        match self.get("T.kind")? {
            "identity" => Ok(TransformT::identity()),
            "cosine" => TransformT::cosine(self.parse_key("T.delta")?),
            _ => Err(self.bad("T.kind", "expected 'identity' or 'cosine'").into()),
        }
    }

    /// `estimate.sigma0` is either a number or `model` (use `sigma(0)` of the model).
    pub fn sigma0(&self, model: Option<&StickyModel>) -> Result<f64> {
        match (self.get("estimate.sigma0")?, model) {
            ("model", Some(m)) => Ok(m.sigma0()),
            ("model", None) => Err(self.bad("estimate.sigma0", "a number is required without a model").into()),
            _ => Ok(self.parse_key("estimate.sigma0")?),
        }
    }

    pub fn estimator(&self, model: Option<&StickyModel>) -> Result<EstimatorConfig> {
        EstimatorConfig::new(
            self.test_function()?,
            self.transform()?,
            self.parse_key("alpha")?,
            self.sigma0(model)?,
        )
    }

    pub fn grid_kind(&self) -> Result<GridKind> {
        match self.get("grid.kind")? {
            "recursive" => Ok(GridKind::Recursive),
            "uniform" => Ok(GridKind::Uniform),
            _ => Err(self.bad("grid.kind", "expected 'recursive' or 'uniform'").into()),
        }
    }

    pub fn simulator(&self) -> Result<SimulatorKind> {
        match self.get("simulator")? {
            "exact" => Ok(SimulatorKind::Exact),
            "stmca" => Ok(SimulatorKind::Stmca {
                grid: self.grid_kind()?,
                h: self.parse_key("grid.h")?,
                xmax: self.parse_key("grid.xmax")?,
                max_boundary_hits: self.parse_key("stmca.max_boundary_hits")?,
            }),
            _ => Err(self.bad("simulator", "expected 'exact' or 'stmca'").into()),
        }
    }

    pub fn mc_config(&self) -> Result<McConfig> {
        let model = self.model()?;
        let estimator = self.estimator(Some(&model))?;
        let cfg = McConfig {
            simulator: self.simulator()?,
            estimator,
            n: self.parse_key("n")?,
            horizon: self.parse_key("horizon")?,
            x0: self.x0()?,
            n_mc: self.parse_key("n_mc")?,
            master_seed: self.parse_key("seed")?,
            drop_rejected: self.parse_key("mc.drop_rejected")?,
            model,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
