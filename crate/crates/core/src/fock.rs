//! Coherent-state number distributions on a truncated Fock space.
//!
//! Amplitudes are real and non-negative (zero coherent phase). Weights are
//! never renormalized after truncation: the discarded probability is kept in
//! [`CoherentAmplitudes::tail_mass`] so that norm checks downstream see the
//! real truncation error.

use crate::error::{Error, Result};

/// Smallest truncation handed out by [`choose_truncation`]; keeps the
/// index-shifted coefficients (`m ± 1`) addressable.
pub const MIN_TRUNCATION: usize = 4;

/// Number-state amplitudes `w_k = e^{-|z|²/2} |z|^k / √k!` for `k = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentAmplitudes {
    magnitude: f64,
    weights: Vec<f64>,
    tail_mass: f64,
}

impl CoherentAmplitudes {
    /// Amplitude magnitude `|z|`.
    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Mean excitation number `|z|²`.
    pub fn mean_excitation(&self) -> f64 {
        self.magnitude * self.magnitude
    }

    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability discarded by the truncation, `1 - Σ w_k²` (clamped at 0).
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Weight at a possibly out-of-range index; anything outside `0..=n_max`
    /// reads as zero.
    #[inline]
    pub fn weight(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        self.weights.get(k as usize).copied().unwrap_or(0.0)
    }

    /// Amplitudes for a coherent state of the given mean excitation, truncated
    /// with [`choose_truncation`].
    pub fn for_mean_excitation(mean_excitation: f64, tail_tol: f64) -> Result<Self> {
        if !mean_excitation.is_finite() || mean_excitation < 0.0 {
            return Err(Error::param(format!(
                "mean excitation must be finite and non-negative, got {mean_excitation}"
            )));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::param(format!("tail tolerance must lie in (0, 1), got {tail_tol}")));
        }
        coherent_amplitudes(mean_excitation.sqrt(), choose_truncation(mean_excitation, tail_tol))
    }
}

/// Coherent-state weights by the recurrence `w_{k+1} = w_k |z| / √(k+1)`,
/// seeded with `w_0 = e^{-|z|²/2}`. The recurrence runs on `ln w_k` so large
/// amplitudes do not underflow at the seed.
pub fn coherent_amplitudes(magnitude: f64, n_max: usize) -> Result<CoherentAmplitudes> {
    if !magnitude.is_finite() {
        return Err(Error::param(format!("coherent amplitude must be finite, got {magnitude}")));
    }
    if magnitude < 0.0 {
        return Err(Error::param(format!(
            "coherent amplitude magnitude must be non-negative, got {magnitude}"
        )));
    }
    let mut weights = Vec::with_capacity(n_max + 1);
    if magnitude == 0.0 {
        weights.push(1.0);
        weights.resize(n_max + 1, 0.0);
    } else {
        let ln_mag = magnitude.ln();
        let mut ln_w = -0.5 * magnitude * magnitude;
        weights.push(ln_w.exp());
        for k in 0..n_max {
            ln_w += ln_mag - 0.5 * ((k + 1) as f64).ln();
            weights.push(ln_w.exp());
        }
    }
    let kept: f64 = weights.iter().map(|w| w * w).sum();
    Ok(CoherentAmplitudes { magnitude, weights, tail_mass: (1.0 - kept).max(0.0) })
}

/// Smallest `n_max` (but at least [`MIN_TRUNCATION`]) whose Poisson tail
/// `Σ_{k > n_max} P(k)` is below `tail_tol`.
///
/// The tail is summed term by term from the far end, so it stays accurate
/// well below the rounding level of `1 - CDF`.
pub fn choose_truncation(mean_excitation: f64, tail_tol: f64) -> usize {
    let mean = mean_excitation.max(0.0);
    if mean == 0.0 {
        return MIN_TRUNCATION;
    }
    // Poisson pmf in log space up to a point far past the mode where terms
    // are below the smallest tolerance anyone will ask for.
    let ln_mean = mean.ln();
    let mut pmf = Vec::new();
    let mut ln_p = -mean;
    let mut k = 0usize;
    loop {
        pmf.push(ln_p.exp());
        k += 1;
        ln_p += ln_mean - (k as f64).ln();
        if k as f64 > mean && ln_p < -800.0 {
            break;
        }
    }
    // suffix[k] = Σ_{j >= k} pmf[j]
    let mut tail = 0.0;
    let mut suffix = vec![0.0; pmf.len() + 1];
    for j in (0..pmf.len()).rev() {
        tail += pmf[j];
        suffix[j] = tail;
    }
    let n = (0..pmf.len()).find(|&n| suffix[n + 1] < tail_tol).unwrap_or(pmf.len());
    n.max(MIN_TRUNCATION)
}
