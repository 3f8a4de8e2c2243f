//! State spaces for the grid walk.

use crate::error::{invalid, Result};

/// Sorted, symmetric point set containing 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    h: f64,
    xmax: f64,
    zero: usize,
}

/// Spacing ramp of the experiment grid: starts at `h^2` at the origin and
/// blends to `h` at `|x| = 1`, after which it stays `h`.
fn ramp_step(x: f64, h: f64) -> f64 {
    let ax = x.abs();
    if ax < 1.0 {
        let w = 1.0 / (ax + 1.0);
        h * h * w + h * (1.0 - w)
    } else {
        h
    }
}

/// Builds the grid `x_0 = 0, x_j = x_{j-1} + step(x_{j-1})` up to the first
/// point `>= xmax`, mirrored to the negative axis.
pub fn build_grid(h: f64, xmax: f64) -> Result<Grid> {
    if !(h > 0.0 && h < 1.0) {
        return Err(invalid(format!("grid resolution h must lie in (0, 1), got {h}")));
    }
    if !(xmax > 1.0) || !xmax.is_finite() {
        return Err(invalid(format!("grid radius xmax must exceed 1, got {xmax}")));
    }
    let mut pos = vec![0.0];
    let mut x = 0.0;
    while x < xmax {
        x += ramp_step(x, h);
        pos.push(x);
    }
    Ok(Grid::mirror(&pos, h, xmax))
}

impl Grid {
    fn mirror(pos: &[f64], h: f64, xmax: f64) -> Self {
        let mut points: Vec<f64> = pos[1..].iter().rev().map(|&x| -x).collect();
        let zero = points.len();
        points.extend_from_slice(pos);
        Self { points, h, xmax, zero }
    }

    /// Equally spaced points `k h` for `|k h| <= ceil(xmax / h) h`.
    pub fn uniform(h: f64, xmax: f64) -> Result<Self> {
        if !(h > 0.0) || !(xmax > 0.0) || !xmax.is_finite() {
            return Err(invalid(format!("uniform grid needs h > 0 and finite xmax > 0, got h={h}, xmax={xmax}")));
        }
        let k = (xmax / h - 1e-9).ceil().max(1.0) as usize;
        let pos: Vec<f64> = (0..=k).map(|i| i as f64 * h).collect();
        Ok(Self::mirror(&pos, h, xmax))
    }

    /// Grid from the nonnegative half `pos` (must start at 0, strictly increasing).
    pub fn from_points(pos: &[f64]) -> Result<Self> {
        if pos.len() < 2 || pos[0] != 0.0 {
            return Err(invalid("grid half-line must start at 0 and have at least two points"));
        }
        if pos.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid points must be strictly increasing"));
        }
        let xmax = *pos.last().unwrap();
        let h = pos.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Ok(Self::mirror(pos, h, xmax))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    /// Index of the point 0.
    pub fn zero_index(&self) -> usize {
        self.zero
    }

    /// Index of the point nearest to `x`; ties go to the point closer to 0.
    pub fn nearest_index(&self, x: f64) -> usize {
        let p = &self.points;
        let i = p.partition_point(|&v| v < x);
        if i == 0 {
            return 0;
        }
        if i == p.len() {
            return p.len() - 1;
        }
        let (lo, hi) = (p[i - 1], p[i]);
        let (dl, dh) = (x - lo, hi - x);
        if dl < dh {
            i - 1
        } else if dh < dl {
            i
        } else if lo.abs() <= hi.abs() {
            i - 1
        } else {
            i
        }
    }
}
