//! Small dense helpers shared by the density-matrix types.

use nalgebra::{DMatrix, Dim, Matrix, Storage, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Health of a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    /// Largest `|ρ_ij - conj(ρ_ji)|`.
    pub hermiticity_error: f64,
    /// `|Tr ρ - 1|`.
    pub trace_error: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn of<R: Dim, C: Dim, S: Storage<C64, R, C>>(rho: &Matrix<C64, R, C, S>) -> Self {
        let n = rho.nrows();
        let mut herm = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                herm = herm.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        let trace: C64 = (0..n).map(|i| rho[(i, i)]).sum();
        let dense = DMatrix::from_fn(n, n, |i, j| 0.5 * (rho[(i, j)] + rho[(j, i)].conj()));
        let min_eigenvalue = SymmetricEigen::new(dense).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        DensityDiagnostics { hermiticity_error: herm, trace_error: (trace - 1.0).norm(), min_eigenvalue }
    }

    /// Checks against the given Hermiticity, trace and positivity bounds.
    pub fn within(&self, herm_tol: f64, trace_tol: f64, eig_floor: f64) -> bool {
        self.hermiticity_error <= herm_tol && self.trace_error <= trace_tol && self.min_eigenvalue >= eig_floor
    }

    /// Combine by keeping the worst value of each field.
    pub fn worst(self, other: Self) -> Self {
        DensityDiagnostics {
            hermiticity_error: self.hermiticity_error.max(other.hermiticity_error),
            trace_error: self.trace_error.max(other.trace_error),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }
}

impl Default for DensityDiagnostics {
    fn default() -> Self {
        DensityDiagnostics { hermiticity_error: 0.0, trace_error: 0.0, min_eigenvalue: f64::INFINITY }
    }
}

/// Trace distance `½‖A − B‖₁` between two Hermitian matrices.
pub fn trace_distance<R: Dim, C: Dim, S1, S2>(a: &Matrix<C64, R, C, S1>, b: &Matrix<C64, R, C, S2>) -> f64
where
    S1: Storage<C64, R, C>,
    S2: Storage<C64, R, C>,
{
    let n = a.nrows();
    let diff = DMatrix::from_fn(n, n, |i, j| {
        let d = a[(i, j)] - b[(i, j)];
        let dt = a[(j, i)] - b[(j, i)];
        0.5 * (d + dt.conj())
    });
    0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

/// Largest entrywise modulus of `A − B`.
pub fn max_entry_diff<R: Dim, C: Dim, S1, S2>(a: &Matrix<C64, R, C, S1>, b: &Matrix<C64, R, C, S2>) -> f64
where
    S1: Storage<C64, R, C>,
    S2: Storage<C64, R, C>,
{
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
