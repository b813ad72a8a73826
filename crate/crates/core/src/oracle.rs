//! Brute-force reference dynamics on the truncated Hilbert space.
//!
//! Nothing here reuses the closed-form coefficients: the Hamiltonian is built
//! from ladder-operator matrix elements, states are propagated numerically,
//! and densities come from explicit partial traces. Basis ordering is qubit
//! slowest (`e` = 0, `g` = 1), then mode `a`, then mode `b`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SymmetricEigen};

use crate::composite::{BellSpec, TwoQubitDensity};
use crate::dynamics::{GlobalState, ModeParams, QubitAmplitudes, QubitDensity};
use crate::error::{Error, Result};
use crate::linalg::{C64, I};

/// Sparse Hermitian operator on `qubit ⊗ mode a ⊗ mode b`.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    n_max_a: usize,
    n_max_b: usize,
    /// `(row, col, value)`, sorted by row.
    entries: Vec<(usize, usize, C64)>,
}

impl TruncatedOperator {
    pub fn dimension(&self) -> usize {
        2 * (self.n_max_a + 1) * (self.n_max_b + 1)
    }

    pub fn n_max_a(&self) -> usize {
        self.n_max_a
    }

    pub fn n_max_b(&self) -> usize {
        self.n_max_b
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// Flat index of `|q, m, n⟩` (`q = 0` is `e`).
    pub fn index(&self, q: usize, m: usize, n: usize) -> usize {
        basis_index(self.n_max_a, self.n_max_b, q, m, n)
    }

    /// Matrix element `⟨i|H|j⟩`.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries.iter().filter(|(r, c, _)| *r == i && *c == j).map(|e| e.2).sum()
    }

    /// Largest `|H_ij − conj H_ji|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Max absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut cols = vec![0.0; self.dimension()];
        for &(_, c, v) in &self.entries {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
    }

    /// `⟨x|H|x⟩` (real for Hermitian `H`).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        self.entries.iter().map(|&(r, c, v)| (x[r].conj() * v * x[c]).re).sum()
    }

    fn from_entries(n_max_a: usize, n_max_b: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        TruncatedOperator { n_max_a, n_max_b, entries }
    }
}

#[inline]
fn basis_index(n_max_a: usize, n_max_b: usize, q: usize, m: usize, n: usize) -> usize {
    (q * (n_max_a + 1) + m) * (n_max_b + 1) + n
}

/// Red-sideband interaction `H/ħ = ηκ(σ₊ a b + σ₋ a† b†)` with `a|m⟩ = √m |m−1⟩`.
pub fn build_red_sideband(p: &ModeParams, n_max_a: usize, n_max_b: usize) -> Result<TruncatedOperator> {
    p.validate()?;
    if n_max_a < 4 || n_max_b < 4 {
        return Err(Error::param(format!("oracle truncation must be at least 4, got ({n_max_a}, {n_max_b})")));
    }
    let rate = p.sideband_rate();
    let mut entries = Vec::new();
    // σ₊ a b : |g, m+1, n+1⟩ → √(m+1)√(n+1) |e, m, n⟩, plus its adjoint
    for m in 0..n_max_a {
        for n in 0..n_max_b {
            let e = basis_index(n_max_a, n_max_b, 0, m, n);
            let g = basis_index(n_max_a, n_max_b, 1, m + 1, n + 1);
            let v = C64::new(rate * ((m + 1) as f64).sqrt() * ((n + 1) as f64).sqrt(), 0.0);
            entries.push((e, g, v));
            entries.push((g, e, v.conj()));
        }
    }
    Ok(TruncatedOperator::from_entries(n_max_a, n_max_b, entries))
}

/// Resonant Jaynes-Cummings interaction `g(σ₊ b + σ₋ b†)` for the stationary
/// qubit; the vibrational mode is a single dummy level.
pub fn build_jaynes_cummings(coupling: f64, n_max_b: usize) -> Result<TruncatedOperator> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::param(format!("coupling must be positive, got {coupling}")));
    }
    if n_max_b < 4 {
        return Err(Error::param(format!("oracle truncation must be at least 4, got {n_max_b}")));
    }
    let mut entries = Vec::new();
    for n in 0..n_max_b {
        let e = basis_index(0, n_max_b, 0, 0, n);
        let g = basis_index(0, n_max_b, 1, 0, n + 1);
        let v = C64::new(coupling * ((n + 1) as f64).sqrt(), 0.0);
        entries.push((e, g, v));
        entries.push((g, e, v));
    }
    Ok(TruncatedOperator::from_entries(0, n_max_b, entries))
}

/// How `exp(−iHt)` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagatorKind {
    /// Split `H` into its connected blocks and exponentiate each block through
    /// a dense Hermitian eigendecomposition.
    #[default]
    BlockDiagonalization,
    /// Truncated Taylor series on sub-steps with `‖H‖₁ δt ≤ 1/2`, summed
    /// until terms drop below 1e-18 relative.
    Taylor,
}

struct Block {
    indices: Vec<usize>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

/// Reusable propagator for a fixed Hamiltonian.
pub struct Propagator<'h> {
    h: &'h TruncatedOperator,
    kind: PropagatorKind,
    blocks: Vec<Block>,
}

impl<'h> Propagator<'h> {
    pub fn new(h: &'h TruncatedOperator, kind: PropagatorKind) -> Self {
        let blocks = match kind {
            PropagatorKind::BlockDiagonalization => decompose_blocks(h),
            PropagatorKind::Taylor => Vec::new(),
        };
        Propagator { h, kind, blocks }
    }

    /// Sizes of the connected blocks (empty for the Taylor propagator).
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    /// `exp(−iHt) ψ`.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        match self.kind {
            PropagatorKind::BlockDiagonalization => self.evolve_blocks(psi, t),
            PropagatorKind::Taylor => self.evolve_taylor(psi, t),
        }
    }

    /// States at each of the (ascending) `times`, stepping from one to the next.
    pub fn trajectory(&self, psi0: &[C64], times: &[f64]) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(times.len());
        let mut psi = psi0.to_vec();
        let mut now = 0.0;
        for &t in times {
            psi = self.evolve(&psi, t - now);
            now = t;
            out.push(psi.clone());
        }
        out
    }

    fn evolve_blocks(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for b in &self.blocks {
            let k = b.indices.len();
            // coefficients in the eigenbasis, rotated by the phases
            let mut c = vec![C64::new(0.0, 0.0); k];
            for (j, cj) in c.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (i, &idx) in b.indices.iter().enumerate() {
                    acc += b.eigenvectors[(i, j)].conj() * psi[idx];
                }
                *cj = acc * (-I * (b.eigenvalues[j] * t)).exp();
            }
            for (i, &idx) in b.indices.iter().enumerate() {
                out[idx] = (0..k).map(|j| b.eigenvectors[(i, j)] * c[j]).sum();
            }
        }
        out
    }

    fn evolve_taylor(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let norm = self.h.one_norm();
        let steps = ((norm * t.abs()) / 0.5).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut v = psi.to_vec();
        let mut term = vec![C64::new(0.0, 0.0); v.len()];
        let mut next = vec![C64::new(0.0, 0.0); v.len()];
        for _ in 0..steps {
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            term.copy_from_slice(&v);
            for k in 1..=80 {
                self.h.apply(&term, &mut next);
                let f = -I * (dt / k as f64);
                let mut biggest = 0.0f64;
                for (tv, nv) in term.iter_mut().zip(&next) {
                    *tv = f * nv;
                    biggest = biggest.max(tv.norm());
                }
                for (x, tv) in v.iter_mut().zip(&term) {
                    *x += tv;
                }
                if biggest < 1e-18 * scale {
                    break;
                }
            }
        }
        v
    }
}

fn decompose_blocks(h: &TruncatedOperator) -> Vec<Block> {
    let dim = h.dimension();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(r, c, v) in h.entries() {
        if v.norm() > 0.0 {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..dim {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut position = vec![0usize; dim];
    let mut blocks = Vec::with_capacity(groups.len());
    for indices in groups.into_values() {
        for (k, &i) in indices.iter().enumerate() {
            position[i] = k;
        }
        let mut dense = DMatrix::<C64>::zeros(indices.len(), indices.len());
        for &(r, c, v) in h.entries() {
            if indices.binary_search(&r).is_ok() {
                dense[(position[r], position[c])] += v;
            }
        }
        let eig = SymmetricEigen::new(dense);
        blocks.push(Block {
            indices,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        });
    }
    blocks
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−iHt) ψ₀` for a normalized `ψ₀`.
pub fn evolve_exact(state0: &[C64], h: &TruncatedOperator, t: f64, kind: PropagatorKind) -> Result<Vec<C64>> {
    if state0.len() != h.dimension() {
        return Err(Error::param(format!(
            "state has dimension {}, operator {}",
            state0.len(),
            h.dimension()
        )));
    }
    let n = norm(state0);
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::param(format!("initial state must be normalized, |ψ| = {n}")));
    }
    if !t.is_finite() {
        return Err(Error::param(format!("time must be finite, got {t}")));
    }
    Ok(Propagator::new(h, kind).evolve(state0, t))
}

/// `|⟨u|v⟩|² / (|u|²|v|²)`.
pub fn fidelity(u: &[C64], v: &[C64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::param(format!("dimension mismatch: {} vs {}", u.len(), v.len())));
    }
    let overlap: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::param("fidelity of a zero vector"));
    }
    Ok((overlap.norm_sqr() / (nu * nv)).min(1.0))
}

/// Coherent-state weights from the closed form, evaluated in log space
/// (`ln k!` by direct summation).
pub fn coherent_weights_direct(magnitude: f64, n_max: usize) -> Vec<f64> {
    let mut ln_fact = 0.0;
    (0..=n_max)
        .map(|k| {
            if k > 0 {
                ln_fact += (k as f64).ln();
            }
            if magnitude == 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            (-0.5 * magnitude * magnitude + k as f64 * magnitude.ln() - 0.5 * ln_fact).exp()
        })
        .collect()
}

/// Normalized `(c_e|e⟩ + c_g|g⟩) ⊗ |α⟩ ⊗ |β⟩` on the operator's space.
pub fn product_initial_state(q0: &QubitAmplitudes, alpha: f64, beta: f64, h: &TruncatedOperator) -> Vec<C64> {
    let wa = coherent_weights_direct(alpha, h.n_max_a());
    let wb = coherent_weights_direct(beta, h.n_max_b());
    let mut v = vec![C64::new(0.0, 0.0); h.dimension()];
    for (q, c) in [(0, q0.c_e), (1, q0.c_g)] {
        for (m, a) in wa.iter().enumerate() {
            for (n, b) in wb.iter().enumerate() {
                v[h.index(q, m, n)] = c * (a * b);
            }
        }
    }
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    v
}

/// Lay a [`GlobalState`] out on the operator's (larger or equal) space.
pub fn embed_global_state(s: &GlobalState, h: &TruncatedOperator) -> Result<Vec<C64>> {
    if s.n_max_a() > h.n_max_a() || s.n_max_b() > h.n_max_b() {
        return Err(Error::param("state grid larger than operator space"));
    }
    let mut v = vec![C64::new(0.0, 0.0); h.dimension()];
    for (m, n, e, g) in s.iter() {
        v[h.index(0, m, n)] = e;
        v[h.index(1, m, n)] = g;
    }
    Ok(v)
}

/// Qubit density by explicit partial trace over both modes.
pub fn partial_trace_qubit(psi: &[C64], h: &TruncatedOperator) -> QubitDensity {
    let modes = (h.n_max_a() + 1) * (h.n_max_b() + 1);
    let (e, g) = psi.split_at(modes);
    let mut rho = Matrix2::<C64>::zeros();
    for k in 0..modes {
        let v = [e[k], g[k]];
        for i in 0..2 {
            for j in 0..2 {
                rho[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    QubitDensity(rho)
}

/// `a ψ` with `a|m⟩ = √m |m−1⟩` on the vibrational mode.
pub fn lower_a(psi: &[C64], h: &TruncatedOperator) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for q in 0..2 {
        for m in 1..=h.n_max_a() {
            for n in 0..=h.n_max_b() {
                out[h.index(q, m - 1, n)] = psi[h.index(q, m, n)] * (m as f64).sqrt();
            }
        }
    }
    out
}

/// `b ψ` on the cavity mode.
pub fn lower_b(psi: &[C64], h: &TruncatedOperator) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for q in 0..2 {
        for m in 0..=h.n_max_a() {
            for n in 1..=h.n_max_b() {
                out[h.index(q, m, n - 1)] = psi[h.index(q, m, n)] * (n as f64).sqrt();
            }
        }
    }
    out
}

/// `(⟨a†a⟩, ⟨b†b⟩, ⟨a†b†ba⟩)` from ladder operators: `‖aψ‖²`, `‖bψ‖²`, `‖baψ‖²`.
pub fn mode_expectations(psi: &[C64], h: &TruncatedOperator) -> (f64, f64, f64) {
    let a = lower_a(psi, h);
    let b = lower_b(psi, h);
    let ba = lower_b(&a, h);
    let sq = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    (sq(&a), sq(&b), sq(&ba))
}

/// Settings for [`two_subsystem_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub propagator: PropagatorKind,
    /// Upper bound on the bytes the four-mode state may occupy.
    pub memory_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { propagator: PropagatorKind::BlockDiagonalization, memory_budget: 1 << 30 }
    }
}

/// Bytes needed by [`two_subsystem_oracle`] at truncation `n_max` (one extra
/// level per mode, state plus one work buffer).
pub fn two_subsystem_bytes(n_max: usize) -> u64 {
    let d = 2 * (n_max as u64 + 2).pow(2);
    2 * d * d * std::mem::size_of::<C64>() as u64
}

/// Two-qubit density from the full four-mode pure state.
///
/// Both subsystems start in `|α⟩|β⟩` with parameters `p`; the joint vector
/// `μ|x₁⟩|y₂⟩ + υ|x'₁⟩|y'₂⟩ ⊗ modes` is propagated by `U₁ ⊗ U₂` (the two
/// Hamiltonians commute) and all four modes are traced out.
pub fn two_subsystem_oracle(
    spec: &BellSpec,
    p: &ModeParams,
    n_max: usize,
    t: f64,
    config: &OracleConfig,
) -> Result<TwoQubitDensity> {
    let spec = BellSpec::new(spec.kind, spec.mu, spec.upsilon)?;
    let required = two_subsystem_bytes(n_max);
    if required > config.memory_budget {
        return Err(Error::Resource { required, budget: config.memory_budget });
    }
    let h = build_red_sideband(p, n_max + 1, n_max + 1)?;
    let d = h.dimension();
    let modes = d / 2;
    let wa = coherent_weights_direct(p.alpha_mag, h.n_max_a());
    let wb = coherent_weights_direct(p.beta_mag, h.n_max_b());
    let mut mode_vec: Vec<f64> = wa.iter().flat_map(|a| wb.iter().map(move |b| a * b)).collect();
    let mn = mode_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    mode_vec.iter_mut().for_each(|x| *x /= mn);

    // ψ[i₁, i₂] with i = q·modes + k for each subsystem
    let mut psi = DMatrix::<C64>::zeros(d, d);
    for (basis, amp) in spec.amplitudes().iter().enumerate() {
        if amp.norm() == 0.0 {
            continue;
        }
        let (q1, q2) = (basis / 2, basis % 2);
        for (k1, w1) in mode_vec.iter().enumerate() {
            for (k2, w2) in mode_vec.iter().enumerate() {
                psi[(q1 * modes + k1, q2 * modes + k2)] += amp * (w1 * w2);
            }
        }
    }

    let prop = Propagator::new(&h, config.propagator);
    // U₁ on every column, then U₂ on every row
    for j in 0..d {
        let col: Vec<C64> = psi.column(j).iter().copied().collect();
        psi.set_column(j, &DVector::from_vec(prop.evolve(&col, t)));
    }
    for i in 0..d {
        let row: Vec<C64> = psi.row(i).iter().copied().collect();
        let evolved = prop.evolve(&row, t);
        for (j, z) in evolved.into_iter().enumerate() {
            psi[(i, j)] = z;
        }
    }

    let mut rho = Matrix4::<C64>::zeros();
    for x in 0..4 {
        for y in 0..4 {
            let (x1, x2, y1, y2) = (x / 2, x % 2, y / 2, y % 2);
            let mut acc = C64::new(0.0, 0.0);
            for k1 in 0..modes {
                for k2 in 0..modes {
                    acc += psi[(x1 * modes + k1, x2 * modes + k2)] * psi[(y1 * modes + k1, y2 * modes + k2)].conj();
                }
            }
            rho[(x, y)] = acc;
        }
    }
    Ok(TwoQubitDensity::new(rho, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::{bell_state, BellKind};

    fn vacuum_params() -> ModeParams {
        ModeParams::new(0.02, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn sideband_matrix_elements() {
        let p = ModeParams::default();
        let h = build_red_sideband(&p, 6, 5).unwrap();
        let rate = p.sideband_rate();
        assert!((h.get(h.index(0, 0, 0), h.index(1, 1, 1)) - rate).norm() < 1e-15);
        for m in 0..6 {
            for n in 0..5 {
                let want = rate * (((m + 1) * (n + 1)) as f64).sqrt();
                assert!((h.get(h.index(0, m, n), h.index(1, m + 1, n + 1)) - want).norm() < 1e-15);
            }
        }
        // selection rule: every stored element is an |e,m,n⟩ ↔ |g,m+1,n+1⟩ pair
        let per_q = 7 * 6;
        for &(r, c, _) in h.entries() {
            let (lo, hi) = (r.min(c), r.max(c));
            assert!(lo < per_q && hi >= per_q);
            let (m, n) = (lo / 6, lo % 6);
            assert_eq!(hi, h.index(1, m + 1, n + 1));
        }
        assert_eq!(h.entries().len(), 2 * 6 * 5);
        assert_eq!(h.hermiticity_error(), 0.0);
        assert_eq!(h.dimension(), 2 * 7 * 6);
    }

    #[test]
    fn truncation_floor() {
        assert!(build_red_sideband(&ModeParams::default(), 3, 8).is_err());
        assert!(build_jaynes_cummings(1.0, 2).is_err());
    }

    #[test]
    fn blocks_are_rabi_pairs() {
        let h = build_red_sideband(&ModeParams::default(), 5, 5).unwrap();
        let prop = Propagator::new(&h, PropagatorKind::BlockDiagonalization);
        let sizes = prop.block_sizes();
        assert!(sizes.iter().all(|&s| s == 1 || s == 2));
        assert_eq!(sizes.iter().filter(|&&s| s == 2).count(), 25);
        assert_eq!(sizes.iter().sum::<usize>(), h.dimension());
    }

    #[test]
    fn zero_time_is_identity() {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 1.0, 1.0).unwrap();
        let h = build_red_sideband(&p, 10, 10).unwrap();
        let psi = product_initial_state(&QubitAmplitudes::balanced(), 1.0, 1.0, &h);
        for kind in [PropagatorKind::BlockDiagonalization, PropagatorKind::Taylor] {
            let out = evolve_exact(&psi, &h, 0.0, kind).unwrap();
            assert!(out.iter().zip(&psi).all(|(a, b)| (a - b).norm() < 1e-15));
        }
    }

    #[test]
    fn isolated_two_level_block() {
        let p = vacuum_params();
        let h = build_red_sideband(&p, 4, 4).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); h.dimension()];
        psi[h.index(0, 0, 0)] = C64::new(1.0, 0.0);
        for kind in [PropagatorKind::BlockDiagonalization, PropagatorKind::Taylor] {
            for t in [3.0, 50.0, 210.0] {
                let th = p.sideband_rate() * t;
                let out = evolve_exact(&psi, &h, t, kind).unwrap();
                assert!((out[h.index(0, 0, 0)] - th.cos()).norm() < 1e-12);
                assert!((out[h.index(1, 1, 1)] + I * th.sin()).norm() < 1e-12);
                let rest: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0;
                assert!(rest.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_unnormalized_input() {
        let h = build_red_sideband(&vacuum_params(), 4, 4).unwrap();
        let psi = vec![C64::new(0.5, 0.0); h.dimension()];
        assert!(evolve_exact(&psi, &h, 1.0, PropagatorKind::Taylor).is_err());
        assert!(evolve_exact(&psi[..3], &h, 1.0, PropagatorKind::Taylor).is_err());
    }

    #[test]
    fn propagators_agree_and_conserve() {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 3.0, 2.0).unwrap();
        let h = build_red_sideband(&p, 22, 20).unwrap();
        let psi = product_initial_state(&QubitAmplitudes::balanced(), p.alpha_mag, p.beta_mag, &h);
        let energy0 = h.expectation(&psi);
        let times: Vec<f64> = (1..=10).map(|k| k as f64 * 500.0).collect();
        let block = Propagator::new(&h, PropagatorKind::BlockDiagonalization).trajectory(&psi, &times);
        let taylor = Propagator::new(&h, PropagatorKind::Taylor).trajectory(&psi, &times);
        for (b, t) in block.iter().zip(&taylor) {
            let diff = b.iter().zip(t).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "propagators differ by {diff:e}");
            assert!((norm(t) - 1.0).abs() < 1e-10);
            assert!((h.expectation(t) - energy0).abs() < 1e-10);
            assert!((h.expectation(b) - energy0).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_properties() {
        let x = vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.7), C64::new(0.0, 0.4)];
        assert!((fidelity(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let ph = C64::from_polar(1.0, 1.234);
        let y: Vec<C64> = x.iter().map(|z| z * ph).collect();
        assert!((fidelity(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let e0 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let e1 = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        assert_eq!(fidelity(&e0, &e1).unwrap(), 0.0);
        assert!(fidelity(&e0, &x).is_err());
    }

    #[test]
    fn direct_weights_match_recurrence() {
        for mag in [0.0, 0.5, 1.0, 2.0, 6.0] {
            let direct = coherent_weights_direct(mag, 120);
            let rec = crate::fock::coherent_amplitudes(mag, 120).unwrap();
            for (k, (a, b)) in direct.iter().zip(rec.weights()).enumerate() {
                if *a > 1e-30 {
                    assert!(((a - b) / a).abs() < 1e-13, "mag {mag}, k {k}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn two_subsystem_oracle_at_zero() {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 1.0, 1.0).unwrap();
        for kind in [BellKind::Phi, BellKind::Psi] {
            let spec = BellSpec::maximal(kind);
            let rho = two_subsystem_oracle(&spec, &p, 6, 0.0, &OracleConfig::default()).unwrap();
            let want = bell_state(&spec).unwrap();
            assert!(crate::linalg::max_entry_diff(&rho.matrix, &want.matrix) < 1e-12);
        }
    }

    #[test]
    fn two_subsystem_oracle_reports_budget() {
        let cfg = OracleConfig { memory_budget: 1024, ..Default::default() };
        let err = two_subsystem_oracle(&BellSpec::maximal(BellKind::Phi), &vacuum_params(), 8, 1.0, &cfg);
        assert_eq!(err.unwrap_err(), Error::Resource { required: two_subsystem_bytes(8), budget: 1024 });
    }
}
