//! Equally spaced observations `X_{i/n}`, the only input the estimators see.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fsutil;

/// Header of the path CSV: observation index, time `i / n`, value.
pub const PATH_CSV_HEADER: &str = "i,t,x";

/// `floor(n * t)` with a relative guard against products such as
/// `100 * 0.29 = 28.999999999999996`.
pub fn steps_in(n: u64, t: f64) -> u64 {
    let nt = n as f64 * t;
    (nt * (1.0 + 4.0 * f64::EPSILON)).floor() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    n: u64,
    horizon: f64,
    values: Vec<f64>,
}

impl PathSample {
    /// `values[i]` is the observation at time `i / n`; there must be exactly
    /// `floor(n * horizon) + 1` of them.
    pub fn new(n: u64, horizon: f64, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("observation frequency n must be positive"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        let want = steps_in(n, horizon) as usize + 1;
        if values.len() != want {
            return Err(invalid(format!(
                "expected {want} observations for n={n}, horizon={horizon}; got {}",
                values.len()
            )));
        }
        Ok(Self { n, horizon, values })
    }

    /// Builds a path from `m >= 2` observations; the horizon is `(m - 1) / n`.
    pub fn from_observations(n: u64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("a path needs at least two observations"));
        }
        let horizon = (values.len() - 1) as f64 / n as f64;
        Self::new(n, horizon, values)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x0(&self) -> f64 {
        self.values[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    /// Replaces values with `|x| <= tol` by exact zeros. External data must
    /// go through this before the occupation statistic can see the sticky point.
    pub fn snap_to_zero(&self, tol: f64) -> Self {
        let values = self
            .values
            .iter()
            .map(|&x| if x.abs() <= tol { 0.0 } else { x })
            .collect();
        Self {
            n: self.n,
            horizon: self.horizon,
            values,
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(24 * self.values.len());
        s.push_str(PATH_CSV_HEADER);
        s.push('\n');
        for (i, x) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{i},{},{x}", self.time(i));
        }
        s
    }

    /// Parses [`to_csv`](Self::to_csv) output. `n` is recovered from the
    /// time column, which must be `i / n` for every row.
    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(PATH_CSV_HEADER) {
            return Err(format!("expected header '{PATH_CSV_HEADER}'"));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(format!("row {} has {} fields, expected 3", k + 1, f.len()));
            }
            let i: usize = f[0].parse().map_err(|_| format!("row {}: bad index '{}'", k + 1, f[0]))?;
            if i != k {
                return Err(format!("row {}: index {i} out of order", k + 1));
            }
            let t: f64 = f[1].parse().map_err(|_| format!("row {}: bad time '{}'", k + 1, f[1]))?;
            let x: f64 = f[2].parse().map_err(|_| format!("row {}: bad value '{}'", k + 1, f[2]))?;
            if !x.is_finite() {
                return Err(format!("row {}: value {x} is not finite", k + 1));
            }
            times.push(t);
            values.push(x);
        }
        if values.len() < 2 {
            return Err("a path needs at least two observations".into());
        }
        if !(times[1] > 0.0) {
            return Err(format!("second time {} must be positive", times[1]));
        }
        let n = (1.0 / times[1]).round() as u64;
        for (i, &t) in times.iter().enumerate() {
            let want = i as f64 / n as f64;
            if (t - want).abs() > 1e-9 * want.max(1.0) {
                return Err(format!("row {}: time {t} is not {i}/{n}", i + 1));
            }
        }
        Self::from_observations(n, values).map_err(|e| e.to_string())
    }
}

pub fn export_path(path: &PathSample, file: &Path) -> Result<()> {
    fsutil::write_atomic(file, path.to_csv().as_bytes())
}

pub fn import_path(file: &Path) -> Result<PathSample> {
    PathSample::from_csv(&fsutil::read_to_string(file)?).map_err(|reason| Error::Parse {
        path: file.to_path_buf(),
        reason,
    })
}
