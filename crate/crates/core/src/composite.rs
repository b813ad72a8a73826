//! Two independent ion-cavity subsystems.
//!
//! The subsystems never interact, so the two-qubit dynamics is the tensor
//! product of the single-qubit maps: `|x₁⟩⟨y₁| ⊗ |x₂⟩⟨y₂|` is sent to
//! `Λ₁(|x₁⟩⟨y₁|) ⊗ Λ₂(|x₂⟩⟨y₂|)`. Basis order is
//! `{|e₁e₂⟩, |e₁g₂⟩, |g₁e₂⟩, |g₁g₂⟩}`.

use nalgebra::linalg::Schur;
use nalgebra::Matrix4;

use crate::dynamics::ProcessMatrix;
use crate::error::{Error, Result};
use crate::linalg::{DensityDiagnostics, C64};
use crate::observables::l1_coherence;

/// Two-qubit density matrix in the computational product basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitDensity {
    pub matrix: Matrix4<C64>,
    pub time: f64,
}

/// Trace deficit accepted by [`concurrence`]. Truncated dynamics lose up to
/// about four times the coherent-state tail tolerance.
pub const TRACE_SLACK: f64 = 1e-4;

impl TwoQubitDensity {
    pub fn new(matrix: Matrix4<C64>, time: f64) -> Self {
        TwoQubitDensity { matrix, time }
    }

    pub fn diagnostics(&self) -> DensityDiagnostics {
        DensityDiagnostics::of(&self.matrix)
    }

    fn check(&self) -> Result<()> {
        let d = self.diagnostics();
        if !d.within(1e-8, TRACE_SLACK, -1e-8) {
            return Err(Error::param(format!(
                "not a density matrix: hermiticity error {:e}, trace error {:e}, min eigenvalue {:e}",
                d.hermiticity_error, d.trace_error, d.min_eigenvalue
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellKind {
    /// `μ|e₁g₂⟩ + υ|g₁e₂⟩`
    Phi,
    /// `μ|e₁e₂⟩ + υ|g₁g₂⟩`
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSpec {
    pub kind: BellKind,
    pub mu: C64,
    pub upsilon: C64,
}

impl BellSpec {
    pub fn new(kind: BellKind, mu: C64, upsilon: C64) -> Result<Self> {
        let norm = mu.norm_sqr() + upsilon.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("Bell amplitudes must satisfy |μ|²+|υ|² = 1, got {norm}")));
        }
        Ok(BellSpec { kind, mu, upsilon })
    }

    /// `μ = υ = 1/√2`.
    pub fn maximal(kind: BellKind) -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        BellSpec { kind, mu: h, upsilon: h }
    }

    /// Basis indices carrying `μ` and `υ`.
    pub fn support(&self) -> (usize, usize) {
        match self.kind {
            BellKind::Phi => (1, 2),
            BellKind::Psi => (0, 3),
        }
    }

    /// State vector in the product basis.
    pub fn amplitudes(&self) -> [C64; 4] {
        let mut v = [C64::new(0.0, 0.0); 4];
        let (i, j) = self.support();
        v[i] = self.mu;
        v[j] = self.upsilon;
        v
    }
}

/// Pure-state density of the Bell-like state.
pub fn bell_state(spec: &BellSpec) -> Result<TwoQubitDensity> {
    let spec = BellSpec::new(spec.kind, spec.mu, spec.upsilon)?;
    let v = spec.amplitudes();
    Ok(TwoQubitDensity::new(Matrix4::from_fn(|i, j| v[i] * v[j].conj()), 0.0))
}

/// Apply `Λ₁ ⊗ Λ₂` to a two-qubit density.
pub fn evolve_two_qubit(rho0: &TwoQubitDensity, m1: &ProcessMatrix, m2: &ProcessMatrix) -> Result<TwoQubitDensity> {
    let (t1, t2) = (m1.time(), m2.time());
    if (t1 - t2).abs() > 1e-12 * t1.abs().max(t2.abs()).max(1.0) {
        return Err(Error::param(format!("subsystem maps taken at different times: {t1} vs {t2}")));
    }
    let (a, b) = (m1.matrix(), m2.matrix());
    let mut out = Matrix4::<C64>::zeros();
    // row index of ρ is x = 2 x₁ + x₂, column index y = 2 y₁ + y₂
    for (row, col, val) in (0..16).map(|k| (k / 4, k % 4, rho0.matrix[(k / 4, k % 4)])) {
        if val == C64::new(0.0, 0.0) {
            continue;
        }
        let src1 = 2 * (row / 2) + col / 2;
        let src2 = 2 * (row % 2) + col % 2;
        for dst1 in 0..4 {
            let f1 = a[(dst1, src1)] * val;
            for dst2 in 0..4 {
                let (xr1, yc1) = (dst1 / 2, dst1 % 2);
                let (xr2, yc2) = (dst2 / 2, dst2 % 2);
                out[(2 * xr1 + xr2, 2 * yc1 + yc2)] += f1 * b[(dst2, src2)];
            }
        }
    }
    Ok(TwoQubitDensity::new(out, t1))
}

/// `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(rho: &Matrix4<C64>) -> Matrix4<C64> {
    let mut yy = Matrix4::<C64>::zeros();
    yy[(0, 3)] = C64::new(-1.0, 0.0);
    yy[(1, 2)] = C64::new(1.0, 0.0);
    yy[(2, 1)] = C64::new(1.0, 0.0);
    yy[(3, 0)] = C64::new(-1.0, 0.0);
    yy * rho.map(|z| z.conj()) * yy
}

/// Wootters concurrence.
///
/// The eigenvalues of the non-Hermitian `ρρ̃` come from a complex Schur
/// decomposition; they are real and non-negative in exact arithmetic, so the
/// real parts are clamped at zero before taking square roots.
pub fn concurrence(rho: &TwoQubitDensity) -> Result<f64> {
    rho.check()?;
    let r = rho.matrix * spin_flip(&rho.matrix);
    let (_, t) = Schur::try_new(r, 1e-15, 10_000)
        .ok_or_else(|| Error::param("Schur decomposition of ρρ̃ did not converge"))?
        .unpack();
    let mut lambdas: Vec<f64> = (0..4).map(|i| t[(i, i)].re.max(0.0)).collect();
    lambdas.sort_by(|x, y| y.total_cmp(x));
    let s: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// l1-norm coherence of the 4×4 density.
pub fn two_qubit_coherence(rho: &TwoQubitDensity) -> Result<f64> {
    l1_coherence(&rho.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{single_qubit_map, ModeParams, Motion, QubitAmplitudes, QubitDensity};
    use crate::linalg::max_entry_diff;
    use nalgebra::{Matrix2, SymmetricEigen};

    fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
        Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
    }

    /// Concurrence through the Hermitian route `√(√ρ ρ̃ √ρ)`, whose
    /// eigenvalues are the square roots of those of `ρρ̃`.
    fn concurrence_hermitian(rho: &Matrix4<C64>) -> f64 {
        let eig = SymmetricEigen::new(*rho);
        let sqrt_vals = eig.eigenvalues.map(|x| C64::from(x.max(0.0).sqrt()));
        let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();
        let h = sqrt_rho * spin_flip(rho) * sqrt_rho;
        let h = (h + h.adjoint()) * C64::from(0.5);
        let mut s: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
        s.sort_by(|x, y| y.total_cmp(x));
        (s[0] - s[1] - s[2] - s[3]).max(0.0)
    }

    #[test]
    fn bell_densities() {
        let phi = bell_state(&BellSpec::maximal(BellKind::Phi)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (1..=2).contains(&i) && (1..=2).contains(&j) { 0.5 } else { 0.0 };
                assert!((phi.matrix[(i, j)] - want).norm() < 1e-15);
            }
        }
        let psi = bell_state(&BellSpec::maximal(BellKind::Psi)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if [0, 3].contains(&i) && [0, 3].contains(&j) { 0.5 } else { 0.0 };
                assert!((psi.matrix[(i, j)] - want).norm() < 1e-15);
            }
        }
        let prod = bell_state(&BellSpec::new(BellKind::Phi, C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap()).unwrap();
        assert_eq!(prod.matrix[(1, 1)], C64::new(1.0, 0.0));
        assert_eq!(prod.matrix.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert!(BellSpec::new(BellKind::Psi, C64::new(1.0, 0.0), C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn concurrence_anchors() {
        for kind in [BellKind::Phi, BellKind::Psi] {
            let rho = bell_state(&BellSpec::maximal(kind)).unwrap();
            assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-12);
            assert!((two_qubit_coherence(&rho).unwrap() - 1.0).abs() < 1e-15);
        }
        let mixed = TwoQubitDensity::new(Matrix4::identity() * C64::from(0.25), 0.0);
        assert!(concurrence(&mixed).unwrap().abs() < 1e-12);
        assert_eq!(two_qubit_coherence(&mixed).unwrap(), 0.0);
    }

    #[test]
    fn concurrence_of_partial_bell() {
        let mu = C64::new(0.6, 0.0);
        let up = C64::new(0.0, 0.8);
        let rho = bell_state(&BellSpec::new(BellKind::Psi, mu, up).unwrap()).unwrap();
        // zero eigenvalues of ρρ̃ carry ~1e-17 round-off, which the square
        // root lifts to ~1e-8
        let c = concurrence(&rho).unwrap();
        assert!((c - 2.0 * 0.6 * 0.8).abs() < 1e-8, "{c}");
    }

    #[test]
    fn concurrence_rejects_non_density() {
        let mut m = Matrix4::<C64>::identity();
        m[(0, 1)] = C64::new(0.3, 0.0);
        assert!(concurrence(&TwoQubitDensity::new(m, 0.0)).is_err());
    }

    #[test]
    fn identity_maps_leave_state() {
        let rho = bell_state(&BellSpec::maximal(BellKind::Phi)).unwrap();
        let id = ProcessMatrix::identity(0.0);
        let out = evolve_two_qubit(&rho, &id, &id).unwrap();
        assert!(max_entry_diff(&out.matrix, &rho.matrix) < 1e-15);
    }

    #[test]
    fn time_mismatch_rejected() {
        let rho = bell_state(&BellSpec::maximal(BellKind::Phi)).unwrap();
        let r = evolve_two_qubit(&rho, &ProcessMatrix::identity(1.0), &ProcessMatrix::identity(2.0));
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn product_input_stays_product() {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 1.0, 2.0).unwrap();
        let (wa, wb) = p.amplitudes(1e-12).unwrap();
        let e = QubitDensity::from_amplitudes(&QubitAmplitudes::excited());
        let g = QubitDensity::from_amplitudes(&QubitAmplitudes::ground());
        let rho0 = TwoQubitDensity::new(kron2(e.matrix(), g.matrix()), 0.0);
        for k in 0..12 {
            let t = 77.0 * k as f64;
            let m = single_qubit_map(&p, &wa, &wb, t, Motion::Vibrating).unwrap();
            let out = evolve_two_qubit(&rho0, &m, &m).unwrap();
            let want = kron2(m.apply(&e).matrix(), m.apply(&g).matrix());
            assert!(max_entry_diff(&out.matrix, &want) < 1e-14);
            assert!(concurrence(&out).unwrap() < 1e-7);
        }
    }

    #[test]
    fn schur_and_hermitian_routes_agree() {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 1.0, 2.0).unwrap();
        let (wa, wb) = p.amplitudes(1e-12).unwrap();
        for kind in [BellKind::Phi, BellKind::Psi] {
            let rho0 = bell_state(&BellSpec::maximal(kind)).unwrap();
            for k in 0..30 {
                let t = 41.0 * k as f64;
                let m = single_qubit_map(&p, &wa, &wb, t, Motion::Vibrating).unwrap();
                let rho = evolve_two_qubit(&rho0, &m, &m).unwrap();
                let c = concurrence(&rho).unwrap();
                assert!((c - concurrence_hermitian(&rho.matrix)).abs() < 1e-7, "t = {t}: {c}");
            }
        }
    }

    #[test]
    fn swapping_identical_maps_is_harmless() {
        let p1 = ModeParams::from_mean_excitations(0.02, 1.0, 1.0, 2.0).unwrap();
        let p2 = ModeParams::from_mean_excitations(0.02, 1.0, 3.0, 1.0).unwrap();
        let (a1, b1) = p1.amplitudes(1e-12).unwrap();
        let (a2, b2) = p2.amplitudes(1e-12).unwrap();
        let rho0 = bell_state(&BellSpec::maximal(BellKind::Phi)).unwrap();
        let m1 = single_qubit_map(&p1, &a1, &b1, 300.0, Motion::Vibrating).unwrap();
        let m2 = single_qubit_map(&p2, &a2, &b2, 300.0, Motion::Vibrating).unwrap();
        let c12 = concurrence(&evolve_two_qubit(&rho0, &m1, &m2).unwrap()).unwrap();
        let c21 = concurrence(&evolve_two_qubit(&rho0, &m2, &m1).unwrap()).unwrap();
        assert!((c12 - c21).abs() < 1e-9);
    }
}
