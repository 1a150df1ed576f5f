//! Initial-condition profiles, validation, and the mollification pipeline
//! producing regularized data families indexed by n.
//!
//! The velocity regularization squeezes the profile toward the interval
//! midpoint by the factor sigma_n = (c sqrt(n) + 1)/(c sqrt(n) - 1) with
//! c = (b-a)/2, then convolves with a standard bump mollifier of width
//! 1/sqrt(n); the squeeze margin exceeds the mollifier width, so the result
//! is supported strictly inside (a, b). The temperature is extended by even
//! reflection (the Neumann-compatible extension) before convolution.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Result, ThermoError};
use crate::field::{BoundaryKind, Field};
use crate::grid::Grid;

/// Built-in initial profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// Smooth localized packet. Dirichlet: sin(pi x^) * exp(-25 (x^-1/2)^2);
    /// Neumann: 1 + cos(pi x^) (nonnegative, flat at the endpoints).
    SinePacket,
    /// Standard compactly supported bump, exp(1 - 1/(1 - r^2)), r = 2 x^ - 1.
    Bump,
    Constant(f64),
    /// Explicit node samples.
    Custom(Vec<f64>),
}

/// Which slot of the initial data a profile fills; fixes the boundary
/// condition and, for the temperature, the nonnegativity requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataRole {
    Displacement,
    Velocity,
    Temperature,
}

impl DataRole {
    pub fn bc(self) -> BoundaryKind {
        match self {
            DataRole::Displacement | DataRole::Velocity => BoundaryKind::DirichletZero,
            DataRole::Temperature => BoundaryKind::NeumannZero,
        }
    }
}

/// The triple (u0, u1, theta0) with theta0 >= 0 and u0, u1 vanishing at the
/// endpoints.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Field,
    pub u1: Field,
    pub theta0: Field,
}

impl InitialData {
    pub fn new(u0: Field, u1: Field, theta0: Field) -> Result<InitialData> {
        assert_eq!(u0.bc(), BoundaryKind::DirichletZero);
        assert_eq!(u1.bc(), BoundaryKind::DirichletZero);
        assert_eq!(theta0.bc(), BoundaryKind::NeumannZero);
        check_nonnegative(theta0.values())?;
        Ok(InitialData { u0, u1, theta0 })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u0.grid()
    }
}

/// Regularized data at index n: sigma_n, eps_n = 1/sqrt(n), and the
/// mollified velocity and temperature.
#[derive(Debug, Clone)]
pub struct MollifiedFamily {
    pub n: u64,
    pub sigma_n: f64,
    pub eps_n: f64,
    pub u1_n: Field,
    pub theta0_n: Field,
}

/// sigma_n = (c sqrt(n) + 1)/(c sqrt(n) - 1) for c = (b-a)/2; requires
/// c sqrt(n) > 1.
pub fn sigma_n(grid: &Grid, n: u64) -> Result<f64> {
    let c = 0.5 * grid.len_interval();
    let cs = c * (n as f64).sqrt();
    if cs <= 1.0 {
        return Err(ThermoError::NTooSmall { n, c });
    }
    Ok((cs + 1.0) / (cs - 1.0))
}

/// Builds the full mollified family for one index n.
pub fn mollify_family(init: &InitialData, n: u64) -> Result<MollifiedFamily> {
    let grid = init.grid();
    let sigma = sigma_n(grid, n)?;
    Ok(MollifiedFamily {
        n,
        sigma_n: sigma,
        eps_n: 1.0 / (n as f64).sqrt(),
        u1_n: mollify_velocity(&init.u1, n)?,
        theta0_n: mollify_temperature(&init.theta0, n)?,
    })
}

fn check_nonnegative(values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if v < 0.0 {
            return Err(ThermoError::NegativeTemperatureProfile { node: i, value: v });
        }
    }
    Ok(())
}

/// Samples a named profile with the boundary condition implied by `role`.
/// Dirichlet profiles that do not vanish at the endpoints on their own are
/// multiplied by a sin(pi x^) cutoff. Temperature profiles must be
/// nonnegative.
pub fn make_profile(kind: &ProfileKind, role: DataRole, grid: &Arc<Grid>) -> Result<Field> {
    let bc = role.bc();
    let shape = |xhat: f64| -> f64 {
        match kind {
            ProfileKind::SinePacket => match bc {
                BoundaryKind::DirichletZero => {
                    (std::f64::consts::PI * xhat).sin() * (-25.0 * (xhat - 0.5).powi(2)).exp()
                }
                BoundaryKind::NeumannZero => 1.0 + (std::f64::consts::PI * xhat).cos(),
            },
            ProfileKind::Bump => {
                let r = 2.0 * xhat - 1.0;
                if r.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            ProfileKind::Constant(c) => match bc {
                BoundaryKind::DirichletZero => c * (std::f64::consts::PI * xhat).sin(),
                BoundaryKind::NeumannZero => *c,
            },
            ProfileKind::Custom(_) => unreachable!("custom handled below"),
        }
    };

    let field = match kind {
        ProfileKind::Custom(samples) => {
            assert_eq!(
                samples.len(),
                grid.n_nodes(),
                "custom sample count must match node count"
            );
            Field::new(grid.clone(), samples.clone(), bc)
        }
        _ => {
            let n = grid.n_nodes();
            let values = (0..n).map(|i| shape(grid.node_hat(i))).collect();
            Field::new(grid.clone(), values, bc)
        }
    };
    if role == DataRole::Temperature {
        check_nonnegative(field.values())?;
    }
    Ok(field)
}

/// Loads a custom profile from a two-column `x value` text file. The x
/// column must match the grid nodes to 1e-12 (strictly increasing).
pub fn profile_from_file(path: &Path, grid: &Grid) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ThermoError::GridMismatch(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(grid.n_nodes());
    let mut idx = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (x, v) = match (parts.next(), parts.next()) {
            (Some(x), Some(v)) => (x, v),
            _ => {
                return Err(ThermoError::GridMismatch(format!(
                    "line {}: expected `x value`",
                    lineno + 1
                )))
            }
        };
        let x: f64 = x.parse().map_err(|_| {
            ThermoError::GridMismatch(format!("line {}: bad x `{x}`", lineno + 1))
        })?;
        let v: f64 = v.parse().map_err(|_| {
            ThermoError::GridMismatch(format!("line {}: bad value `{v}`", lineno + 1))
        })?;
        if idx >= grid.n_nodes() {
            return Err(ThermoError::GridMismatch(format!(
                "more rows than grid nodes ({})",
                grid.n_nodes()
            )));
        }
        let expect = grid.node(idx);
        if (x - expect).abs() > 1e-12 {
            return Err(ThermoError::GridMismatch(format!(
                "line {}: x = {x} does not match node {idx} at {expect}",
                lineno + 1
            )));
        }
        values.push(v);
        idx += 1;
    }
    if idx != grid.n_nodes() {
        return Err(ThermoError::GridMismatch(format!(
            "{} rows for {} nodes",
            idx,
            grid.n_nodes()
        )));
    }
    Ok(values)
}

/// Discrete bump-mollifier samples at offsets j*h, |j*h| < eps, renormalized
/// so the quadrature sum h * sum(kernel) equals one; convolution with it then
/// preserves constants exactly (up to roundoff).
fn mollifier_kernel(h: f64, eps: f64) -> Vec<f64> {
    let bump = |x: f64| -> f64 {
        if x.abs() < 1.0 {
            (-1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    };
    let m = ((eps / h).ceil() as i64 - 1).max(0);
    let mut k: Vec<f64> = (-m..=m).map(|j| bump(j as f64 * h / eps)).collect();
    let s: f64 = h * k.iter().sum::<f64>();
    for v in &mut k {
        *v /= s;
    }
    k
}

/// Linear interpolation of node values at an arbitrary point, zero outside
/// the interval.
fn interp_or_zero(field: &Field, x: f64) -> f64 {
    let g = field.grid();
    if x <= g.a() || x >= g.b() {
        return 0.0;
    }
    let s = (x - g.a()) / g.h();
    let i = (s.floor() as usize).min(g.n_cells() - 1);
    let frac = s - i as f64;
    let v = field.values();
    v[i] * (1.0 - frac) + v[i + 1] * frac
}

/// Regularized initial velocity u1^n: squeeze about the midpoint by sigma_n,
/// then discrete convolution with the bump mollifier of width 1/sqrt(n).
/// The result is supported strictly inside (a, b).
pub fn mollify_velocity(u1: &Field, n: u64) -> Result<Field> {
    assert_eq!(u1.bc(), BoundaryKind::DirichletZero);
    let grid = u1.grid();
    let sigma = sigma_n(grid, n)?;
    let eps = 1.0 / (n as f64).sqrt();
    let mid = 0.5 * (grid.a() + grid.b());
    let nn = grid.n_nodes();

    // Squeezed samples: u~(x) = u1(sigma*(x - mid) + mid), zero off-interval.
    let squeezed: Vec<f64> = (0..nn)
        .map(|i| interp_or_zero(u1, sigma * (grid.node(i) - mid) + mid))
        .collect();

    let kernel = mollifier_kernel(grid.h(), eps);
    let m = (kernel.len() / 2) as i64;
    let h = grid.h();
    let values: Vec<f64> = (0..nn as i64)
        .map(|i| {
            let mut acc = 0.0;
            for (kj, j) in kernel.iter().zip(-m..=m) {
                let src = i - j;
                if (0..nn as i64).contains(&src) {
                    acc += h * kj * squeezed[src as usize];
                }
            }
            acc
        })
        .collect();
    Ok(Field::new(grid.clone(), values, BoundaryKind::DirichletZero))
}

/// Regularized initial temperature theta0^n: even-reflection extension past
/// each endpoint, convolution with the bump mollifier, restriction to the
/// grid. Roundoff negatives in (-1e-15, 0) are clamped to zero.
pub fn mollify_temperature(theta0: &Field, n: u64) -> Result<Field> {
    assert_eq!(theta0.bc(), BoundaryKind::NeumannZero);
    check_nonnegative(theta0.values())?;
    let grid = theta0.grid();
    let eps = 1.0 / (n as f64).sqrt();
    let kernel = mollifier_kernel(grid.h(), eps);
    let m = (kernel.len() / 2) as i64;
    let h = grid.h();
    let last = grid.n_cells() as i64;
    let v = theta0.values();

    // Even reflection about both endpoints (period 2*last).
    let reflect = |mut i: i64| -> f64 {
        loop {
            if i < 0 {
                i = -i;
            } else if i > last {
                i = 2 * last - i;
            } else {
                return v[i as usize];
            }
        }
    };

    let values: Vec<f64> = (0..=last)
        .map(|i| {
            let mut acc = 0.0;
            for (kj, j) in kernel.iter().zip(-m..=m) {
                acc += h * kj * reflect(i - j);
            }
            if acc < 0.0 && acc > -1e-15 {
                0.0
            } else {
                acc
            }
        })
        .collect();
    let out = Field::new(grid.clone(), values, BoundaryKind::NeumannZero);
    debug_assert!(out.min() >= 0.0, "mollified temperature went negative");
    Ok(out)
}
