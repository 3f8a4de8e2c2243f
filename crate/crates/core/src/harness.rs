//! Parallel Monte Carlo runner for the stickiness estimator.
//!
//! Trial `j` draws from `derive_stream(master_seed, j)` and results are
//! gathered in trial order, so a report does not depend on how many worker
//! threads ran it. Several `alpha` values can be evaluated on the same
//! simulated paths with [`run_mc_sweep`].

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{path_sums, EstimateRecord, EstimatorConfig, Regime};
use crate::fsutil;
use crate::model::StickyModel;
use crate::path::PathSample;
use crate::rng::derive_stream;
use crate::simulate::{build_grid, simulate_sbm_exact, EventPath, Grid, StmcaChain};
use crate::stats::mean_and_variance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Recursive,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulatorKind {
    /// Exact transition sampling; sticky Brownian motion only.
    Exact,
    Stmca {
        grid: GridKind,
        h: f64,
        xmax: f64,
        max_boundary_hits: u64,
    },
}

impl SimulatorKind {
    pub fn label(&self) -> String {
        match self {
            SimulatorKind::Exact => "exact".into(),
            SimulatorKind::Stmca { grid, h, xmax, .. } => {
                let g = match grid {
                    GridKind::Recursive => "recursive",
                    GridKind::Uniform => "uniform",
                };
                format!("stmca({g},h={h},xmax={xmax})")
            }
        }
    }

    pub fn build_grid(&self) -> Result<Option<Grid>> {
        match *self {
            SimulatorKind::Exact => Ok(None),
            SimulatorKind::Stmca { grid, h, xmax, .. } => Ok(Some(match grid {
                GridKind::Recursive => build_grid(h, xmax)?,
                GridKind::Uniform => Grid::uniform(h, xmax)?,
            })),
        }
    }
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub model: StickyModel,
    pub simulator: SimulatorKind,
    pub estimator: EstimatorConfig,
    pub n: u64,
    pub horizon: f64,
    pub x0: f64,
    pub n_mc: u64,
    pub master_seed: u64,
    /// Compute moments over the non-rejected trials only (starred rows).
    pub drop_rejected: bool,
}

impl McConfig {
    /// Sticky Brownian motion, exact sampler, experiment test function,
    /// `x0 = 0`, horizon 1.
    pub fn experiment(rho: f64, alpha: f64, n: u64, n_mc: u64, master_seed: u64) -> Result<Self> {
        Ok(Self {
            model: StickyModel::sticky_bm(rho)?,
            simulator: SimulatorKind::Exact,
            estimator: EstimatorConfig::experiment(alpha)?,
            n,
            horizon: 1.0,
            x0: 0.0,
            n_mc,
            master_seed,
            drop_rejected: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_mc == 0 {
            return Err(invalid("n_mc must be at least 1"));
        }
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !self.model.contains(self.x0) {
            return Err(invalid(format!("x0 = {} outside the model domain", self.x0)));
        }
        if self.simulator == SimulatorKind::Exact && !self.model.is_sticky_bm() {
            return Err(invalid("the exact simulator only supports sticky Brownian motion (mu = 0, sigma = 1)"));
        }
        Ok(())
    }
}

enum PathSource {
    Exact { rho: f64 },
    Chain(StmcaChain),
}

impl PathSource {
    fn new(cfg: &McConfig) -> Result<Self> {
        cfg.validate()?;
        match &cfg.simulator {
            SimulatorKind::Exact => Ok(PathSource::Exact { rho: cfg.model.rho() }),
            s @ SimulatorKind::Stmca { max_boundary_hits, .. } => {
                let grid = s.build_grid()?.expect("grid simulator");
                Ok(PathSource::Chain(
                    StmcaChain::new(&cfg.model, grid)?.with_max_boundary_hits(*max_boundary_hits),
                ))
            }
        }
    }

    fn path(&self, cfg: &McConfig, trial: u64) -> Result<PathSample> {
        let mut rng = derive_stream(cfg.master_seed, trial);
        match self {
            PathSource::Exact { rho } => simulate_sbm_exact(cfg.x0, *rho, cfg.n, cfg.horizon, &mut rng),
            PathSource::Chain(c) => c.observe(cfg.x0, cfg.n, cfg.horizon, &mut rng),
        }
    }
}

/// Simulates the path of trial `trial` exactly as [`run_mc`] does.
pub fn trial_path(cfg: &McConfig, trial: u64) -> Result<PathSample> {
    PathSource::new(cfg)?.path(cfg, trial)
}

/// Event trajectory behind [`trial_path`]; grid simulators only.
pub fn trial_events(cfg: &McConfig, trial: u64) -> Result<EventPath> {
    match PathSource::new(cfg)? {
        PathSource::Chain(c) => c.simulate(cfg.x0, cfg.horizon, &mut derive_stream(cfg.master_seed, trial)),
        PathSource::Exact { .. } => Err(invalid("event paths exist only for the grid simulator")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub alpha: f64,
    pub n: u64,
    pub horizon: f64,
    pub n_mc: u64,
    pub master_seed: u64,
    pub rho_true: f64,
    pub regime: Regime,
    pub simulator: String,
    /// `sigma(0) / λ(g)`.
    pub local_time_scale: f64,
    pub rho_mc: Option<f64>,
    pub s2_mc: Option<f64>,
    pub sigma_mc: Option<f64>,
    pub acc: f64,
    pub rej: u64,
    pub n_effective: u64,
    pub starred: bool,
    pub per_trial: Vec<EstimateRecord>,
}

struct Trial {
    record: EstimateRecord,
    observed: f64,
}

pub fn run_mc(cfg: &McConfig) -> Result<McReport> {
    let mut v = run_mc_sweep(cfg, &[cfg.estimator.alpha()])?;
    Ok(v.remove(0))
}

/// One report per entry of `alphas`, all computed on the same paths.
pub fn run_mc_sweep(cfg: &McConfig, alphas: &[f64]) -> Result<Vec<McReport>> {
    let ests = alphas
        .iter()
        .map(|&a| cfg.estimator.with_alpha(a))
        .collect::<Result<Vec<_>>>()?;
    let source = PathSource::new(cfg)?;
    let trials: Vec<Vec<Trial>> = (0..cfg.n_mc)
        .into_par_iter()
        .map(|j| {
            let path = source.path(cfg, j)?;
            ests.iter()
                .map(|e| {
                    let sums = path_sums(&path, e, cfg.horizon)?;
                    Ok(Trial {
                        record: EstimateRecord::from_sums(&sums, cfg.n, e),
                        observed: sums.observed as f64 / cfg.n as f64,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ests
        .iter()
        .enumerate()
        .map(|(k, e)| aggregate(cfg, e, trials.iter().map(|t| &t[k])))
        .collect())
}

fn aggregate<'a>(cfg: &McConfig, est: &EstimatorConfig, trials: impl Iterator<Item = &'a Trial>) -> McReport {
    let mut per_trial = Vec::with_capacity(cfg.n_mc as usize);
    let mut acc_sum = 0.0;
    for t in trials {
        per_trial.push(t.record);
        acc_sum += t.observed;
    }
    let rej = per_trial.iter().filter(|r| r.rejected).count() as u64;
    let accepted: Vec<f64> = per_trial.iter().filter_map(|r| r.rho_hat).collect();
    let moments_allowed = rej == 0 || cfg.drop_rejected;
    let moments = if moments_allowed { mean_and_variance(&accepted) } else { None };
    let starred = cfg.drop_rejected && rej > 0;
    McReport {
        alpha: est.alpha(),
        n: cfg.n,
        horizon: cfg.horizon,
        n_mc: cfg.n_mc,
        master_seed: cfg.master_seed,
        rho_true: cfg.model.rho(),
        regime: est.regime(),
        simulator: cfg.simulator.label(),
        local_time_scale: est.local_time_scale(),
        rho_mc: moments.map(|m| m.0),
        s2_mc: moments.map(|m| m.1),
        sigma_mc: moments.map(|m| m.1.sqrt()),
        acc: acc_sum / cfg.n_mc as f64,
        rej,
        n_effective: if starred { cfg.n_mc - rej } else { cfg.n_mc },
        starred,
        per_trial,
    }
}

/// `(n, c / ln n)` for each `n`.
pub fn alpha_n_schedule(c: f64, n_list: &[u64]) -> Result<Vec<(u64, f64)>> {
    if !(c > 0.0) {
        return Err(invalid(format!("schedule constant must be positive, got {c}")));
    }
    n_list
        .iter()
        .map(|&n| {
            if n <= 1 {
                Err(invalid(format!("schedule needs n > 1, got {n}")))
            } else {
                Ok((n, c / (n as f64).ln()))
            }
        })
        .collect()
}

/// Counts of `values` in `n_bins` equal bins over `[lo, hi]`; values outside
/// the range land in the end bins.
pub fn histogram(values: &[f64], n_bins: usize, lo: f64, hi: f64) -> Result<Vec<(f64, u64)>> {
    if n_bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("histogram needs n_bins >= 1 and finite lo < hi, got {n_bins}, [{lo}, {hi}]")));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &v in values {
        if v.is_nan() {
            return Err(invalid("histogram input contains NaN"));
        }
        let k = ((v - lo) / width).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(n_bins - 1) };
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + (k as f64 + 0.5) * width, c))
        .collect())
}

pub fn histogram_csv(bins: &[(f64, u64)]) -> String {
    let mut s = String::from("bin_center,count\n");
    for (c, k) in bins {
        let _ = writeln!(s, "{c},{k}");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(invalid(format!("unknown report format '{other}' (csv|json)"))),
        }
    }
}

pub const CSV_HEADER: &str = "trial,rho_hat,t1,occupation,rejected";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn report_to_csv(r: &McReport) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (j, t) in r.per_trial.iter().enumerate() {
        let _ = writeln!(s, "{j},{},{},{},{}", opt(t.rho_hat), t.t1, t.occupation, t.rejected);
    }
    let summary: [(&str, String); 16] = [
        ("alpha", r.alpha.to_string()),
        ("n", r.n.to_string()),
        ("horizon", r.horizon.to_string()),
        ("n_mc", r.n_mc.to_string()),
        ("master_seed", r.master_seed.to_string()),
        ("rho_true", r.rho_true.to_string()),
        ("regime", r.regime.as_str().to_string()),
        ("simulator", r.simulator.clone()),
        ("local_time_scale", r.local_time_scale.to_string()),
        ("rho_mc", opt(r.rho_mc)),
        ("s2_mc", opt(r.s2_mc)),
        ("sigma_mc", opt(r.sigma_mc)),
        ("acc", r.acc.to_string()),
        ("rej", r.rej.to_string()),
        ("n_effective", r.n_effective.to_string()),
        ("starred", r.starred.to_string()),
    ];
    for (k, v) in summary {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

pub fn report_to_json(r: &McReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

struct CsvReader<'a> {
    path: &'a Path,
}

impl CsvReader<'_> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            reason: reason.into(),
        }
    }

    fn num<T: FromStr>(&self, what: &str, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad value '{s}' for {what}")))
    }

    fn opt_num(&self, what: &str, s: &str) -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            self.num(what, s).map(Some)
        }
    }

    fn parse(&self, text: &str) -> Result<McReport> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(self.err(format!("expected header '{CSV_HEADER}'")));
        }
        let mut rows = Vec::new();
        let mut meta = std::collections::HashMap::new();
        for (i, line) in lines.enumerate() {
            if let Some(c) = line.strip_prefix('#') {
                let (k, v) = c
                    .trim_start()
                    .split_once('=')
                    .ok_or_else(|| self.err(format!("summary line {} lacks '='", i + 2)))?;
                meta.insert(k.to_string(), v.to_string());
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(self.err(format!("line {} has {} fields, expected 5", i + 2, f.len())));
            }
            let trial: usize = self.num("trial", f[0])?;
            if trial != rows.len() {
                return Err(self.err(format!("trial index {trial} out of order")));
            }
            rows.push((self.opt_num("rho_hat", f[1])?, self.num::<f64>("t1", f[2])?, self.num::<f64>("occupation", f[3])?, self.num::<bool>("rejected", f[4])?));
        }
        let get = |k: &str| meta.get(k).map(String::as_str).ok_or_else(|| self.err(format!("missing summary key '{k}'")));
        let scale: f64 = self.num("local_time_scale", get("local_time_scale")?)?;
        let per_trial = rows
            .into_iter()
            .map(|(rho_hat, t1, occupation, rejected)| EstimateRecord {
                t1,
                local_time: t1 * scale,
                occupation,
                rho_hat,
                rejected,
            })
            .collect();
        let regime = match get("regime")? {
            "theorem" => Regime::Theorem,
            "conjecture" => Regime::Conjecture,
            other => return Err(self.err(format!("unknown regime '{other}'"))),
        };
        Ok(McReport {
            alpha: self.num("alpha", get("alpha")?)?,
            n: self.num("n", get("n")?)?,
            horizon: self.num("horizon", get("horizon")?)?,
            n_mc: self.num("n_mc", get("n_mc")?)?,
            master_seed: self.num("master_seed", get("master_seed")?)?,
            rho_true: self.num("rho_true", get("rho_true")?)?,
            regime,
            simulator: get("simulator")?.to_string(),
            local_time_scale: scale,
            rho_mc: self.opt_num("rho_mc", get("rho_mc")?)?,
            s2_mc: self.opt_num("s2_mc", get("s2_mc")?)?,
            sigma_mc: self.opt_num("sigma_mc", get("sigma_mc")?)?,
            acc: self.num("acc", get("acc")?)?,
            rej: self.num("rej", get("rej")?)?,
            n_effective: self.num("n_effective", get("n_effective")?)?,
            starred: self.num("starred", get("starred")?)?,
            per_trial,
        })
    }
}

/// Writes the report atomically.
pub fn export_report(report: &McReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report_to_csv(report),
        ReportFormat::Json => report_to_json(report),
    };
    fsutil::write_atomic(path, text.as_bytes())
}

pub fn import_report(path: &Path, format: ReportFormat) -> Result<McReport> {
    let text = fsutil::read_to_string(path)?;
    match format {
        ReportFormat::Csv => CsvReader { path }.parse(&text),
        ReportFormat::Json => serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }),
    }
}

pub fn export_histogram(bins: &[(f64, u64)], path: &Path) -> Result<()> {
    fsutil::write_atomic(path, histogram_csv(bins).as_bytes())
}
