use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform grid `t_k = k T / grid_n`, `k = 0..=grid_n`, on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Horizon {
    t_end: f64,
    grid_n: usize,
}

impl Horizon {
    pub fn new(t_end: f64, grid_n: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::NonPositive { name: "T", value: t_end });
        }
        if grid_n < 2 {
            return Err(Error::InvalidInput(format!("grid_n must be at least 2, got {grid_n}")));
        }
        Ok(Self { t_end, grid_n })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of intervals; the grid has `grid_n + 1` nodes.
    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn nodes(&self) -> usize {
        self.grid_n + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.grid_n as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.grid_n {
            self.t_end
        } else {
            k as f64 * self.t_end / self.grid_n as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes()).map(|k| self.time(k)).collect()
    }

    /// Same horizon on a different grid.
    pub fn with_grid(&self, grid_n: usize) -> Result<Self> {
        Horizon::new(self.t_end, grid_n)
    }

    /// Samples `f` on every grid node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.nodes()).map(|k| f(self.time(k))).collect()
    }
}
