//! Sampled fields on a grid, discrete differential operators with
//! summation-by-parts structure, norms, and the Agmon inequality check.
//!
//! The displacement u and velocity u_t carry homogeneous Dirichlet data,
//! the temperature carries homogeneous Neumann data. The second-derivative
//! stencil realizes the Neumann condition by ghost reflection, which makes
//! the operator exactly mass-conserving under the trapezoid weights.

use std::sync::Arc;

use crate::grid::Grid;

/// Boundary-condition tag carried by every field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Homogeneous Dirichlet: endpoint values are pinned to zero.
    DirichletZero,
    /// Homogeneous Neumann: endpoint derivative is zero.
    NeumannZero,
}

/// Real-valued function sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    bc: BoundaryKind,
}

/// Discrete norms of a field: weighted L1, L2, max, and the L2 norm of the
/// discrete derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSet {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub h1_semi: f64,
}

/// Outcome of evaluating Agmon's inequality on a field.
#[derive(Debug, Clone, Copy)]
pub struct AgmonReport {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs * slack factor + absolute floor - lhs; nonnegative iff `holds`.
    pub slack: f64,
}

/// Multiplicative slack absorbing quadrature error in the inequality check.
const AGMON_SLACK: f64 = 1.05;
const AGMON_FLOOR: f64 = 1e-10;

impl Field {
    /// Builds a field from node values, enforcing Dirichlet endpoints exactly.
    pub fn new(grid: Arc<Grid>, mut values: Vec<f64>, bc: BoundaryKind) -> Field {
        assert_eq!(values.len(), grid.n_nodes(), "value count must match nodes");
        if bc == BoundaryKind::DirichletZero {
            values[0] = 0.0;
            *values.last_mut().unwrap() = 0.0;
        }
        Field { grid, values, bc }
    }

    /// Samples `f` at the nodes; Dirichlet endpoints are set to exactly zero.
    pub fn from_fn(grid: &Arc<Grid>, bc: BoundaryKind, f: impl Fn(f64) -> f64) -> Field {
        let values = (0..grid.n_nodes()).map(|i| f(grid.node(i))).collect();
        Field::new(grid.clone(), values, bc)
    }

    pub fn zeros(grid: &Arc<Grid>, bc: BoundaryKind) -> Field {
        Field::new(grid.clone(), vec![0.0; grid.n_nodes()], bc)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max-norm of the difference of two fields on the same mesh.
    pub fn dist_linf(&self, other: &Field) -> f64 {
        debug_assert!(self.grid.same_mesh(&other.grid));
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Weighted L2 norm of the difference of two fields on the same mesh.
    pub fn dist_l2(&self, other: &Field) -> f64 {
        debug_assert!(self.grid.same_mesh(&other.grid));
        let w = self.grid.quad_weights();
        self.values
            .iter()
            .zip(&other.values)
            .zip(w)
            .map(|((a, b), wi)| wi * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Weighted inner product sum_i w_i f_i g_i (trapezoid rule).
    pub fn inner(&self, other: &Field) -> f64 {
        debug_assert!(self.grid.same_mesh(&other.grid));
        let w = self.grid.quad_weights();
        self.values
            .iter()
            .zip(&other.values)
            .zip(w)
            .map(|((a, b), wi)| wi * a * b)
            .sum()
    }

    /// Weighted integral sum_i w_i f_i.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.quad_weights())
            .map(|(v, w)| w * v)
            .sum()
    }

    /// Discrete first derivative. Centered differences at interior nodes;
    /// one-sided second-order stencils at Dirichlet endpoints; exact zero at
    /// Neumann endpoints. The result is tagged Neumann so later quadrature of
    /// derivative fields stays well-defined.
    pub fn d1(&self) -> Field {
        let n = self.grid.n_cells();
        let h = self.grid.h();
        let v = &self.values;
        let mut out = vec![0.0; n + 1];
        for i in 1..n {
            out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        match self.bc {
            BoundaryKind::DirichletZero => {
                out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
                out[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
            }
            BoundaryKind::NeumannZero => {
                out[0] = 0.0;
                out[n] = 0.0;
            }
        }
        Field {
            grid: self.grid.clone(),
            values: out,
            bc: BoundaryKind::NeumannZero,
        }
    }

    /// Discrete second derivative, three-point stencil. Dirichlet: boundary
    /// rows are unused (values pinned, output endpoints zero). Neumann: ghost
    /// reflection f[-1] = f[1], f[n+1] = f[n-1], which makes the operator
    /// symmetric under the trapezoid inner product and exactly
    /// mass-conserving (weighted row sums pair to zero).
    pub fn d2(&self) -> Field {
        let n = self.grid.n_cells();
        let h2 = self.grid.h() * self.grid.h();
        let v = &self.values;
        let mut out = vec![0.0; n + 1];
        for i in 1..n {
            out[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / h2;
        }
        match self.bc {
            BoundaryKind::DirichletZero => {
                out[0] = 0.0;
                out[n] = 0.0;
            }
            BoundaryKind::NeumannZero => {
                out[0] = (2.0 * v[1] - 2.0 * v[0]) / h2;
                out[n] = (2.0 * v[n - 1] - 2.0 * v[n]) / h2;
            }
        }
        Field {
            grid: self.grid.clone(),
            values: out,
            bc: self.bc,
        }
    }

    /// All discrete norms of the field; weights come from the grid.
    pub fn norms(&self) -> NormSet {
        let w = self.grid.quad_weights();
        let mut l1 = 0.0;
        let mut l2sq = 0.0;
        let mut linf = 0.0f64;
        for (v, wi) in self.values.iter().zip(w) {
            l1 += wi * v.abs();
            l2sq += wi * v * v;
            linf = linf.max(v.abs());
        }
        let h1_semi = self.d1().norms_l2_only();
        NormSet {
            l1,
            l2: l2sq.sqrt(),
            linf,
            h1_semi,
        }
    }

    fn norms_l2_only(&self) -> f64 {
        let w = self.grid.quad_weights();
        self.values
            .iter()
            .zip(w)
            .map(|(v, wi)| wi * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates Agmon's inequality with discrete norms. For Dirichlet fields
    /// the zero-trace form ||f||_inf <= sqrt(||f|| ||f_x||) applies; otherwise
    /// the general form sqrt(2 ||f|| ||f_x||) + sqrt(mean of f^2). A 5% slack
    /// plus an absolute floor absorbs quadrature error.
    pub fn agmon_check(&self) -> AgmonReport {
        let ns = self.norms();
        let lhs = ns.linf;
        let rhs = match self.bc {
            BoundaryKind::DirichletZero => (ns.l2 * ns.h1_semi).sqrt(),
            BoundaryKind::NeumannZero => {
                (2.0 * ns.l2 * ns.h1_semi).sqrt() + ns.l2 / self.grid.len_interval().sqrt()
            }
        };
        let budget = rhs * AGMON_SLACK + AGMON_FLOOR;
        AgmonReport {
            holds: lhs <= budget,
            lhs,
            rhs,
            slack: budget - lhs,
        }
    }
}
