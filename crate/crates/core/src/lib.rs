//! One-dimensional coupled thermoelasticity simulator.
//!
//! The target system couples a wave equation for the elastic displacement u
//! (homogeneous Dirichlet data) with a heat equation for the temperature
//! theta (homogeneous Neumann data) through a material constant mu:
//!
//! ```text
//! u_tt - u_xx - nu u_txx = -mu theta_x
//! theta_t - theta_xx     = -mu theta u_tx
//! ```
//!
//! The term nu u_txx is an artificial structural viscosity; nu = 0 runs the
//! limit system directly. Each time step solves the coupled pair by a Picard
//! fixed-point iteration over two implicit tridiagonal substeps, preserving
//! the structure the continuous problem provides: a discrete energy
//! identity, nonnegative temperature (M-matrix heat step), a-priori norm
//! bounds, and Agmon's interpolation inequality, all of which are audited at
//! runtime by the diagnostics layer.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod initial;
pub mod solver;
pub mod tridiag;

pub use error::{Result, ThermoError};
pub use field::{AgmonReport, BoundaryKind, Field, NormSet};
pub use grid::Grid;
pub use initial::{DataRole, InitialData, MollifiedFamily, ProfileKind};
pub use solver::{Forcing, Observer, PhysParams, RunResult, SimState, StepInfo};
pub use tridiag::tridiag_solve;
