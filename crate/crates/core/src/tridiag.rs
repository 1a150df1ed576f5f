//! Thomas-algorithm solver for the tridiagonal systems of the implicit
//! substeps.

use crate::error::{Result, ThermoError};

/// Solves A x = rhs for tridiagonal A, O(n).
///
/// `lower[i]` is A[i+1][i], `diag[i]` is A[i][i], `upper[i]` is A[i][i+1].
/// Intended for strictly diagonally dominant or symmetric positive definite
/// systems, where elimination without pivoting is stable. If a pivot falls
/// below 1e-14 (relative to the diagonal scale) the solve refuses with
/// `NonDominantMatrix` rather than produce garbage.
pub fn tridiag_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(n >= 1, "empty system");
    assert_eq!(lower.len(), n - 1, "lower band length");
    assert_eq!(upper.len(), n - 1, "upper band length");
    assert_eq!(rhs.len(), n, "rhs length");

    let scale = diag.iter().fold(1.0f64, |m, d| m.max(d.abs()));
    let pivot_floor = 1e-14 * scale;

    // Forward elimination with scratch copies of the diagonal and rhs.
    let mut d = diag.to_vec();
    let mut r = rhs.to_vec();
    for i in 1..n {
        let pivot = d[i - 1];
        if pivot.abs() < pivot_floor {
            return Err(ThermoError::NonDominantMatrix {
                row: i - 1,
                pivot,
            });
        }
        let m = lower[i - 1] / pivot;
        d[i] -= m * upper[i - 1];
        r[i] -= m * r[i - 1];
    }
    let last = d[n - 1];
    if last.abs() < pivot_floor {
        return Err(ThermoError::NonDominantMatrix {
            row: n - 1,
            pivot: last,
        });
    }

    let mut x = vec![0.0; n];
    x[n - 1] = r[n - 1] / d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (r[i] - upper[i] * x[i + 1]) / d[i];
    }
    Ok(x)
}
