use thiserror::Error;

/// Errors produced by the grid, data, and solver layers.
#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("tridiagonal solve refused: pivot {pivot:.3e} at row {row} on a non-dominant matrix")]
    NonDominantMatrix { row: usize, pivot: f64 },

    #[error("temperature profile has a negative sample ({value:.3e} at node {node})")]
    NegativeTemperatureProfile { node: usize, value: f64 },

    #[error("mollifier index n = {n} too small for half-width c = {c} (need c*sqrt(n) > 1)")]
    NTooSmall { n: u64, c: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("temperature positivity lost: min value {min_value:.3e} at t = {t:.6}")]
    PositivityLoss { min_value: f64, t: f64 },

    #[error("Picard iteration diverged at t = {t:.6}: residual {residual:.3e} after {iters} iterations")]
    PicardDivergence { t: f64, residual: f64, iters: u32 },

    #[error("run aborted at t = {t_reached:.6}: {reason}")]
    AbortedRun { reason: String, t_reached: f64 },

    #[error("manufactured solution incompatible with boundary conditions: {0}")]
    IncompatibleExactSolution(String),
}

pub type Result<T> = std::result::Result<T, ThermoError>;
