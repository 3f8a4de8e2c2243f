//! Path generation: exact sticky-BM observations and the grid walk.

pub mod exact;
pub mod grid;
pub mod stmca;

pub use exact::simulate_sbm_exact;
pub use grid::{build_grid, Grid};
pub use stmca::{simulate_stmca, stmca_step_params, StepParams, StmcaChain};

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{invalid, Result};
use crate::fsutil;
use crate::path::{steps_in, PathSample};

/// Header of the event CSV: entry time and state of each holding interval.
pub const EVENTS_CSV_HEADER: &str = "time,state";

/// Piecewise-constant trajectory: `states[k]` is entered at `times[k]` and
/// held until the next event, or until `end_time` for the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPath {
    times: Vec<f64>,
    states: Vec<f64>,
    end_time: f64,
}

impl EventPath {
    pub fn new(times: Vec<f64>, states: Vec<f64>, end_time: f64) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(invalid("event path needs equally many (>= 1) times and states"));
        }
        if times[0] != 0.0 {
            return Err(invalid("event path must start at time 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("event times must be strictly increasing"));
        }
        if !(end_time >= *times.last().unwrap()) {
            return Err(invalid("end time precedes the last event"));
        }
        Ok(Self {
            times,
            states,
            end_time,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn end_time(&self) -> f64 {
        self.end_time
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State in force at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        self.states[k.saturating_sub(1)]
    }

    /// Lebesgue time spent at exactly 0 during `[0, horizon]`.
    pub fn occupation_at_zero(&self, horizon: f64) -> Result<f64> {
        self.check_covers(horizon)?;
        let mut total = 0.0;
        for (k, &s) in self.states.iter().enumerate() {
            let start = self.times[k];
            if start >= horizon {
                break;
            }
            let stop = self.times.get(k + 1).copied().unwrap_or(self.end_time).min(horizon);
            if s == 0.0 {
                total += stop - start;
            }
        }
        Ok(total)
    }

    /// One row per event; the final row repeats the last state at `end_time`
    /// when that is finite.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(24 * self.times.len());
        s.push_str(EVENTS_CSV_HEADER);
        s.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            let _ = writeln!(s, "{t},{x}");
        }
        if self.end_time.is_finite() && self.end_time > *self.times.last().unwrap() {
            let _ = writeln!(s, "{},{}", self.end_time, self.states.last().unwrap());
        }
        s
    }

    fn check_covers(&self, horizon: f64) -> Result<()> {
        if !(horizon > 0.0) || horizon > self.end_time {
            return Err(invalid(format!(
                "horizon {horizon} is not covered by the path (ends at {})",
                self.end_time
            )));
        }
        Ok(())
    }
}

pub fn export_events(ep: &EventPath, file: &Path) -> Result<()> {
    fsutil::write_atomic(file, ep.to_csv().as_bytes())
}

/// Observes `ep` at `i / n`, `i = 0..=floor(n horizon)`.
pub fn resample_path(ep: &EventPath, n: u64, horizon: f64) -> Result<PathSample> {
    ep.check_covers(horizon)?;
    if n == 0 {
        return Err(invalid("observation frequency n must be positive"));
    }
    let m = steps_in(n, horizon) as usize;
    let mut values = Vec::with_capacity(m + 1);
    let mut k = 0;
    for i in 0..=m {
        let t = i as f64 / n as f64;
        while k + 1 < ep.times.len() && ep.times[k + 1] <= t {
            k += 1;
        }
        values.push(ep.states[k]);
    }
    PathSample::new(n, horizon, values)
}
