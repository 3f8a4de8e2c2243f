//! Exact observations of the sticky Brownian motion.

use crate::error::{invalid, Result};
use crate::kernel::TransitionSampler;
use crate::path::{steps_in, PathSample};
use crate::rng::RandomSource;

/// `X_{i/n}` for `i = 0..=floor(n horizon)`, each step drawn from the exact
/// transition law over `1/n`. Visits to the sticky point are exact zeros.
pub fn simulate_sbm_exact(x0: f64, rho: f64, n: u64, horizon: f64, rng: &mut RandomSource) -> Result<PathSample> {
    if n == 0 {
        return Err(invalid("observation frequency n must be positive"));
    }
    if !x0.is_finite() {
        return Err(invalid(format!("start point must be finite, got {x0}")));
    }
    let sampler = TransitionSampler::new(1.0 / n as f64, rho)?;
    let m = steps_in(n, horizon) as usize;
    let mut values = Vec::with_capacity(m + 1);
    let mut x = x0;
    values.push(x);
    for _ in 0..m {
        x = sampler.sample(x, rng)?;
        values.push(x);
    }
    PathSample::new(n, horizon, values)
}
