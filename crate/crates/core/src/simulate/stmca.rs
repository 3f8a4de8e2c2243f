//! Space-time Markov chain approximation (STMCA) of a sticky SDE.
//!
//! From interior node `x_j` the walk waits the expected exit time of the cell
//! `(x_{j-1}, x_{j+1})` and then steps up with the scale-function exit
//! probability. Holding times are deterministic. The outermost nodes reflect
//! inward, reuse the holding time of their interior neighbour, and are
//! counted so that a too-small truncation radius is reported instead of
//! silently biasing the law.

use rand::RngCore;

use super::grid::Grid;
use super::EventPath;
use crate::error::{invalid, Error, Result};
use crate::model::StickyModel;
use crate::path::{steps_in, PathSample};
use crate::rng::RandomSource;
use crate::speed_scale::{expected_exit_time, exit_up_probability, ExitProblem};

pub const DEFAULT_MAX_BOUNDARY_HITS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub p_up: f64,
    pub dt: f64,
}

/// Exit probability and holding time of interior node `j`.
pub fn stmca_step_params(model: &StickyModel, grid: &Grid, j: usize) -> Result<StepParams> {
    let p = grid.points();
    if j == 0 || j + 1 >= p.len() {
        return Err(invalid(format!("node {j} is not interior to a grid of {} points", p.len())));
    }
    let cell = ExitProblem::new(model, p[j - 1], p[j], p[j + 1])?;
    let dt = expected_exit_time(&cell)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("non-positive holding time {dt} at node {j} (x = {})", p[j])));
    }
    Ok(StepParams {
        p_up: exit_up_probability(&cell)?,
        dt,
    })
}

/// Precomputed transition table of the walk on a fixed grid.
#[derive(Debug, Clone)]
pub struct StmcaChain {
    grid: Grid,
    p_up: Vec<f64>,
    // Step up iff a raw 64-bit draw is below the threshold.
    up_threshold: Vec<u64>,
    dt: Vec<f64>,
    max_boundary_hits: u64,
}

impl StmcaChain {
    pub fn new(model: &StickyModel, grid: Grid) -> Result<Self> {
        let n = grid.len();
        if n < 3 {
            return Err(invalid("grid walk needs at least three points"));
        }
        let mut p_up = vec![0.0; n];
        let mut dt = vec![0.0; n];
        for j in 1..n - 1 {
            let s = stmca_step_params(model, &grid, j)?;
            p_up[j] = s.p_up;
            dt[j] = s.dt;
        }
        p_up[0] = 1.0;
        dt[0] = dt[1];
        p_up[n - 1] = 0.0;
        dt[n - 1] = dt[n - 2];
        let up_threshold = p_up.iter().map(|&p| (p * 18_446_744_073_709_551_616.0) as u64).collect();
        Ok(Self {
            grid,
            p_up,
            up_threshold,
            dt,
            max_boundary_hits: DEFAULT_MAX_BOUNDARY_HITS,
        })
    }

    pub fn with_max_boundary_hits(mut self, limit: u64) -> Self {
        self.max_boundary_hits = limit;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn step_params(&self, j: usize) -> Option<StepParams> {
        (j > 0 && j + 1 < self.grid.len()).then(|| StepParams {
            p_up: self.p_up[j],
            dt: self.dt[j],
        })
    }

    pub fn holding_times(&self) -> &[f64] {
        &self.dt
    }

    /// Runs the walk from the node nearest `x0`, calling `on_event(time, node)`
    /// for the start and every jump before `horizon`. Returns the time at which
    /// the last holding period ends (the first clock value `>= horizon`).
    fn walk(
        &self,
        x0: f64,
        horizon: f64,
        rng: &mut RandomSource,
        mut on_event: impl FnMut(f64, usize),
    ) -> Result<f64> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        let last = self.grid.len() - 1;
        let mut j = self.grid.nearest_index(x0);
        let mut t = 0.0;
        let mut hits = 0u64;
        on_event(0.0, j);
        loop {
            let next = t + self.dt[j];
            if next >= horizon {
                return Ok(next);
            }
            j = if j == 0 {
                hits += 1;
                1
            } else if j == last {
                hits += 1;
                last - 1
            } else if rng.next_u64() < self.up_threshold[j] {
                j + 1
            } else {
                j - 1
            };
            if hits > self.max_boundary_hits {
                return Err(Error::BoundaryHits {
                    hits,
                    limit: self.max_boundary_hits,
                });
            }
            t = next;
            on_event(t, j);
        }
    }

    /// Full trajectory on `[0, horizon]`.
    pub fn simulate(&self, x0: f64, horizon: f64, rng: &mut RandomSource) -> Result<EventPath> {
        let pts = self.grid.points();
        let mut times = Vec::new();
        let mut states = Vec::new();
        let end = self.walk(x0, horizon, rng, |t, j| {
            times.push(t);
            states.push(pts[j]);
        })?;
        EventPath::new(times, states, end)
    }

    /// Observations at `i / n` taken on the fly, without storing the events.
    /// Equal to resampling [`simulate`](Self::simulate) with the same source.
    pub fn observe(&self, x0: f64, n: u64, horizon: f64, rng: &mut RandomSource) -> Result<PathSample> {
        let pts = self.grid.points();
        let m = steps_in(n, horizon) as usize;
        let nf = n as f64;
        let mut values = Vec::with_capacity(m + 1);
        let mut cur = 0.0;
        self.walk(x0, horizon, rng, |t, j| {
            while values.len() <= m && (values.len() as f64 / nf) < t {
                values.push(cur);
            }
            cur = pts[j];
        })?;
        values.resize(m + 1, cur);
        PathSample::new(n, horizon, values)
    }
}

/// One-shot convenience: builds the chain and runs a single walk.
pub fn simulate_stmca(
    model: &StickyModel,
    grid: &Grid,
    x0: f64,
    horizon: f64,
    rng: &mut RandomSource,
) -> Result<EventPath> {
    StmcaChain::new(model, grid.clone())?.simulate(x0, horizon, rng)
}
