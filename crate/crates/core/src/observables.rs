//! Scalar observables: l1-norm coherence and photon-phonon correlations.

use nalgebra::{Dim, Matrix, Storage};

use crate::dynamics::GlobalState;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Hermiticity tolerance accepted by [`l1_coherence`].
pub const HERMITICITY_TOL: f64 = 1e-9;

/// Sum of the moduli of all off-diagonal entries, `Σ_{i≠j} |ρ_ij|`.
///
/// Accepts 2×2 (single qubit) and 4×4 (two qubit) Hermitian matrices.
pub fn l1_coherence<R: Dim, C: Dim, S: Storage<C64, R, C>>(rho: &Matrix<C64, R, C, S>) -> Result<f64> {
    let (r, c) = rho.shape();
    if r != c {
        return Err(Error::param(format!("density matrix must be square, got {r}x{c}")));
    }
    if r != 2 && r != 4 {
        return Err(Error::param(format!("expected a 2x2 or 4x4 density matrix, got {r}x{r}")));
    }
    let mut sum = 0.0;
    for i in 0..r {
        for j in 0..r {
            let herm = (rho[(i, j)] - rho[(j, i)].conj()).norm();
            if herm > HERMITICITY_TOL {
                return Err(Error::param(format!("matrix is not Hermitian: |ρ[{i},{j}] - conj ρ[{j},{i}]| = {herm:e}")));
            }
            if i != j {
                sum += rho[(i, j)].norm();
            }
        }
    }
    Ok(sum)
}

/// Mode occupations and their correlation at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSample {
    pub time: f64,
    /// `⟨a†a⟩` (vibrational).
    pub n_a_mean: f64,
    /// `⟨b†b⟩` (cavity).
    pub n_b_mean: f64,
    /// `⟨a†b†ba⟩ = ⟨n_a n_b⟩`.
    pub joint_mean: f64,
    /// `C = ⟨n_a n_b⟩ − ⟨n_a⟩⟨n_b⟩`.
    pub cross_corr: f64,
    /// `G² = ⟨n_a n_b⟩ / (⟨n_a⟩⟨n_b⟩)`, undefined when the denominator
    /// vanishes.
    pub g2: Option<f64>,
}

/// Below this `⟨n_a⟩⟨n_b⟩` the intermode coherence is left undefined.
pub const G2_DENOMINATOR_FLOOR: f64 = 1e-15;

/// Mode moments of a global pure state. The operators are diagonal in the
/// Fock basis, so the averages are weighted sums of the grid populations.
/// Averages are taken with respect to the state's own norm, which differs
/// from 1 only by the truncation tail.
pub fn mode_moments(s: &GlobalState) -> CorrelationSample {
    let mut norm = 0.0;
    let mut n_a = 0.0;
    let mut n_b = 0.0;
    let mut joint = 0.0;
    for (m, n, e, g) in s.iter() {
        let pop = e.norm_sqr() + g.norm_sqr();
        norm += pop;
        let (m, n) = (m as f64, n as f64);
        n_a += m * pop;
        n_b += n * pop;
        joint += m * n * pop;
    }
    if norm > 0.0 {
        n_a /= norm;
        n_b /= norm;
        joint /= norm;
    }
    let denom = n_a * n_b;
    CorrelationSample {
        time: s.time(),
        n_a_mean: n_a,
        n_b_mean: n_b,
        joint_mean: joint,
        cross_corr: joint - denom,
        g2: (denom > G2_DENOMINATOR_FLOOR).then(|| joint / denom),
    }
}
