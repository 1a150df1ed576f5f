//! Uniform 1D grid over (a, b) with trapezoid quadrature weights.

use std::sync::Arc;

use crate::error::{Result, ThermoError};

/// Uniform mesh on the interval (a, b) with `n_cells` cells and `n_cells + 1`
/// nodes. Owns the trapezoid quadrature weights: h/2 at the endpoints, h at
/// interior nodes, so that the weighted sum of a sampled function is its
/// trapezoid-rule integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n_cells: usize,
    h: f64,
    quad_weights: Vec<f64>,
}

impl Grid {
    /// Stencils (and the trapezoid rule on at least two cells) need
    /// `n_cells >= 2`.
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Arc<Grid>> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(ThermoError::InvalidGrid(format!(
                "need finite b > a, got a = {a}, b = {b}"
            )));
        }
        if n_cells < 2 {
            return Err(ThermoError::InvalidGrid(format!(
                "need n_cells >= 2, got {n_cells}"
            )));
        }
        let h = (b - a) / n_cells as f64;
        let mut quad_weights = vec![h; n_cells + 1];
        quad_weights[0] = 0.5 * h;
        quad_weights[n_cells] = 0.5 * h;
        Ok(Arc::new(Grid {
            a,
            b,
            n_cells,
            h,
            quad_weights,
        }))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Interval length b - a.
    pub fn len_interval(&self) -> f64 {
        self.b - self.a
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of node `i`.
    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Normalized coordinate (x - a)/(b - a) of node `i`, in [0, 1].
    pub fn node_hat(&self, i: usize) -> f64 {
        (self.node(i) - self.a) / (self.b - self.a)
    }

    /// Two grids are compatible when they describe the same mesh.
    pub fn same_mesh(&self, other: &Grid) -> bool {
        self.a == other.a && self.b == other.b && self.n_cells == other.n_cells
    }
}
