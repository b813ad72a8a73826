//! Closed-form evolution of one trapped-ion qubit coupled to its vibrational
//! mode and a single cavity mode on the first red sideband.
//!
//! The interaction `ħηκ(σ₊ a b + σ₋ a† b†)` only couples the pairs
//! `|e, m, n⟩ ↔ |g, m+1, n+1⟩`, so every amplitude is a Rabi rotation with
//! frequency `ηκ√((m+1)(n+1))`. Index `m` labels the vibrational (phonon)
//! mode with amplitude `α`, index `n` the cavity (photon) mode with `β`.
//!
//! A stationary qubit is modeled as the resonant Jaynes-Cummings problem with
//! only the cavity mode, coupling [`ModeParams::stationary_coupling`].

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::fock::CoherentAmplitudes;
use crate::linalg::{DensityDiagnostics, C64, I};

/// Largest Lamb-Dicke parameter accepted.
pub const MAX_LAMB_DICKE: f64 = 0.3;
/// Above this a warning is logged; the first-order expansion gets shaky.
pub const LAMB_DICKE_WARN: f64 = 0.1;

/// Physical parameters of one ion-cavity subsystem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    /// Lamb-Dicke parameter `η`.
    pub eta: f64,
    /// Qubit-cavity coupling `κ` (inverse time).
    pub kappa: f64,
    /// Coherent amplitude `|α|` of the vibrational mode.
    pub alpha_mag: f64,
    /// Coherent amplitude `|β|` of the cavity mode.
    pub beta_mag: f64,
    /// Qubit, cavity and trap frequencies. Bookkeeping only; when all three
    /// are present they must sit on the red sideband `ω₀ − ω = ω_v`.
    pub omega0: Option<f64>,
    pub omega: Option<f64>,
    pub omega_v: Option<f64>,
    /// Coupling used for the stationary-qubit baseline.
    pub stationary_coupling: f64,
}

impl Default for ModeParams {
    fn default() -> Self {
        ModeParams {
            eta: 0.02,
            kappa: 1.0,
            alpha_mag: 1.0,
            beta_mag: 1.0,
            omega0: None,
            omega: None,
            omega_v: None,
            stationary_coupling: 1.0,
        }
    }
}

impl ModeParams {
    /// Parameters with the stationary coupling defaulting to `kappa`.
    pub fn new(eta: f64, kappa: f64, alpha_mag: f64, beta_mag: f64) -> Result<Self> {
        let p = ModeParams {
            eta,
            kappa,
            alpha_mag,
            beta_mag,
            omega0: None,
            omega: None,
            omega_v: None,
            stationary_coupling: kappa,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`ModeParams::new`] but taking mean excitations `|α|²`, `|β|²`.
    pub fn from_mean_excitations(eta: f64, kappa: f64, alpha_sq: f64, beta_sq: f64) -> Result<Self> {
        for (name, v) in [("alpha_sq", alpha_sq), ("beta_sq", beta_sq)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Self::new(eta, kappa, alpha_sq.sqrt(), beta_sq.sqrt())
    }

    pub fn with_stationary_coupling(mut self, g: f64) -> Result<Self> {
        self.stationary_coupling = g;
        self.validate()?;
        Ok(self)
    }

    pub fn with_frequencies(mut self, omega0: f64, omega: f64, omega_v: f64) -> Result<Self> {
        self.omega0 = Some(omega0);
        self.omega = Some(omega);
        self.omega_v = Some(omega_v);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::param(format!("eta must be positive, got {}", self.eta)));
        }
        if self.eta > MAX_LAMB_DICKE {
            return Err(Error::param(format!(
                "eta = {} is outside the Lamb-Dicke regime (eta <= {MAX_LAMB_DICKE})",
                self.eta
            )));
        }
        if self.eta > LAMB_DICKE_WARN {
            log::warn!("eta = {} is large for a first-order Lamb-Dicke expansion", self.eta);
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::param(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.stationary_coupling.is_finite() && self.stationary_coupling > 0.0) {
            return Err(Error::param(format!(
                "stationary coupling must be positive, got {}",
                self.stationary_coupling
            )));
        }
        for (name, v) in [("alpha", self.alpha_mag), ("beta", self.beta_mag)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(format!("|{name}| must be finite and non-negative, got {v}")));
            }
        }
        let freqs = [self.omega0, self.omega, self.omega_v];
        for f in freqs.iter().flatten() {
            if !f.is_finite() || *f < 0.0 {
                return Err(Error::param(format!("frequencies must be finite and non-negative, got {f}")));
            }
        }
        if let [Some(w0), Some(w), Some(wv)] = freqs {
            let scale = w0.abs().max(w.abs()).max(wv.abs()).max(f64::MIN_POSITIVE);
            if ((w0 - w) - wv).abs() > 1e-9 * scale {
                return Err(Error::param(format!(
                    "not on the red sideband: omega0 - omega = {} but omega_v = {wv}",
                    w0 - w
                )));
            }
        }
        Ok(())
    }

    /// Sideband Rabi rate `ηκ`.
    pub fn sideband_rate(&self) -> f64 {
        self.eta * self.kappa
    }

    /// Truncated coherent amplitudes for the vibrational and cavity modes.
    pub fn amplitudes(&self, tail_tol: f64) -> Result<(CoherentAmplitudes, CoherentAmplitudes)> {
        Ok((
            CoherentAmplitudes::for_mean_excitation(self.alpha_mag * self.alpha_mag, tail_tol)?,
            CoherentAmplitudes::for_mean_excitation(self.beta_mag * self.beta_mag, tail_tol)?,
        ))
    }
}

/// Initial qubit state `c_e|e⟩ + c_g|g⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAmplitudes {
    pub c_e: C64,
    pub c_g: C64,
}

impl QubitAmplitudes {
    pub fn new(c_e: C64, c_g: C64) -> Result<Self> {
        let norm = c_e.norm_sqr() + c_g.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("qubit amplitudes must be normalized, |c_e|²+|c_g|² = {norm}")));
        }
        Ok(QubitAmplitudes { c_e, c_g })
    }

    pub fn excited() -> Self {
        QubitAmplitudes { c_e: C64::new(1.0, 0.0), c_g: C64::new(0.0, 0.0) }
    }

    pub fn ground() -> Self {
        QubitAmplitudes { c_e: C64::new(0.0, 0.0), c_g: C64::new(1.0, 0.0) }
    }

    /// `(|e⟩ + |g⟩)/√2`.
    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        QubitAmplitudes { c_e: C64::new(h, 0.0), c_g: C64::new(h, 0.0) }
    }
}

/// Which `D` coefficient to use for the `|e⟩ → |g⟩` transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DCoefficient {
    /// `D_{m,n} = −i w_{m−1} w_{n−1} sin(ηκt√(mn))`: the amplitude that
    /// actually flows from `|e, m−1, n−1⟩`. Norm-conserving.
    #[default]
    Shifted,
    /// `D_{m,n} = −i w_m w_n sin(ηκt√(mn))`. Does not conserve the norm;
    /// only kept so regression tests can show that.
    Unshifted,
}

/// The four amplitudes of the `(m, n)` grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

#[inline]
fn coefficients_unchecked(
    m: usize,
    n: usize,
    phase: f64,
    wa: &CoherentAmplitudes,
    wb: &CoherentAmplitudes,
    d_form: DCoefficient,
) -> Coefficients {
    let (mi, ni) = (m as i64, n as i64);
    let w_mn = wa.weight(mi) * wb.weight(ni);
    let up = phase * (((m + 1) * (n + 1)) as f64).sqrt();
    let down = phase * ((m * n) as f64).sqrt();
    let a = C64::new(w_mn * up.cos(), 0.0);
    let b = -I * (wa.weight(mi + 1) * wb.weight(ni + 1) * up.sin());
    let c = C64::new(w_mn * down.cos(), 0.0);
    let d_weight = match d_form {
        DCoefficient::Shifted => wa.weight(mi - 1) * wb.weight(ni - 1),
        DCoefficient::Unshifted => w_mn,
    };
    // sin(0) = 0 already zeroes d on the m = 0 or n = 0 edges
    let d = -I * (d_weight * down.sin());
    Coefficients { a, b, c, d }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::param(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// Amplitudes `A, B, C, D` at grid point `(m, n)` and time `t`.
pub fn coefficients(
    m: usize,
    n: usize,
    t: f64,
    p: &ModeParams,
    wa: &CoherentAmplitudes,
    wb: &CoherentAmplitudes,
) -> Result<Coefficients> {
    check_time(t)?;
    if m > wa.n_max() || n > wb.n_max() {
        return Err(Error::param(format!(
            "grid index ({m}, {n}) outside truncation ({}, {})",
            wa.n_max(),
            wb.n_max()
        )));
    }
    Ok(coefficients_unchecked(m, n, p.sideband_rate() * t, wa, wb, DCoefficient::Shifted))
}

/// Pure state of qubit ⊗ vibrational mode ⊗ cavity mode, stored as the two
/// qubit branches `E[m][n]` (with `|e⟩`) and `F[m][n]` (with `|g⟩`).
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalState {
    e_branch: Vec<C64>,
    g_branch: Vec<C64>,
    n_max_a: usize,
    n_max_b: usize,
    time: f64,
}

impl GlobalState {
    fn zeros(n_max_a: usize, n_max_b: usize, time: f64) -> Self {
        let len = (n_max_a + 1) * (n_max_b + 1);
        GlobalState {
            e_branch: vec![C64::new(0.0, 0.0); len],
            g_branch: vec![C64::new(0.0, 0.0); len],
            n_max_a,
            n_max_b,
            time,
        }
    }

    #[inline]
    fn idx(&self, m: usize, n: usize) -> usize {
        m * (self.n_max_b + 1) + n
    }

    /// `E[m][n]`; zero outside the grid.
    pub fn e(&self, m: usize, n: usize) -> C64 {
        if m > self.n_max_a || n > self.n_max_b {
            return C64::new(0.0, 0.0);
        }
        self.e_branch[self.idx(m, n)]
    }

    /// `F[m][n]`; zero outside the grid.
    pub fn g(&self, m: usize, n: usize) -> C64 {
        if m > self.n_max_a || n > self.n_max_b {
            return C64::new(0.0, 0.0);
        }
        self.g_branch[self.idx(m, n)]
    }

    /// Row-major `E` grid, `(n_max_a + 1) × (n_max_b + 1)`.
    pub fn e_branch(&self) -> &[C64] {
        &self.e_branch
    }

    pub fn g_branch(&self) -> &[C64] {
        &self.g_branch
    }

    pub fn n_max_a(&self) -> usize {
        self.n_max_a
    }

    pub fn n_max_b(&self) -> usize {
        self.n_max_b
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `Σ |E|² + |F|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.e_branch.iter().chain(&self.g_branch).map(|z| z.norm_sqr()).sum()
    }

    /// Iterate `(m, n, E, F)` over the grid in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64, C64)> + '_ {
        let cols = self.n_max_b + 1;
        self.e_branch
            .iter()
            .zip(&self.g_branch)
            .enumerate()
            .map(move |(k, (e, g))| (k / cols, k % cols, *e, *g))
    }
}

/// Evolve `(c_e|e⟩ + c_g|g⟩) ⊗ |α⟩ ⊗ |β⟩` to time `t`.
pub fn evolve_state(
    q0: &QubitAmplitudes,
    p: &ModeParams,
    wa: &CoherentAmplitudes,
    wb: &CoherentAmplitudes,
    t: f64,
) -> Result<GlobalState> {
    evolve_state_with(q0, p, wa, wb, t, DCoefficient::Shifted)
}

/// [`evolve_state`] with an explicit choice of `D` coefficient.
pub fn evolve_state_with(
    q0: &QubitAmplitudes,
    p: &ModeParams,
    wa: &CoherentAmplitudes,
    wb: &CoherentAmplitudes,
    t: f64,
    d_form: DCoefficient,
) -> Result<GlobalState> {
    check_time(t)?;
    p.validate()?;
    let phase = p.sideband_rate() * t;
    let mut s = GlobalState::zeros(wa.n_max(), wb.n_max(), t);
    for m in 0..=wa.n_max() {
        for n in 0..=wb.n_max() {
            let k = coefficients_unchecked(m, n, phase, wa, wb, d_form);
            let i = s.idx(m, n);
            s.e_branch[i] = q0.c_e * k.a + q0.c_g * k.b;
            s.g_branch[i] = q0.c_g * k.c + q0.c_e * k.d;
        }
    }
    Ok(s)
}

/// Stationary-qubit baseline: resonant Jaynes-Cummings evolution with the
/// cavity mode only. The vibrational grid collapses to the single index 0.
pub fn stationary_evolve(
    q0: &QubitAmplitudes,
    p: &ModeParams,
    wb: &CoherentAmplitudes,
    t: f64,
) -> Result<GlobalState> {
    check_time(t)?;
    p.validate()?;
    let gt = p.stationary_coupling * t;
    let mut s = GlobalState::zeros(0, wb.n_max(), t);
    for n in 0..=wb.n_max() {
        let [v_e, v_g] = jcm_columns(n, gt, wb);
        s.e_branch[n] = q0.c_e * v_e[0] + q0.c_g * v_g[0];
        s.g_branch[n] = q0.c_e * v_e[1] + q0.c_g * v_g[1];
    }
    Ok(s)
}

/// Images of `|e⟩` and `|g⟩` at photon index `n`, as `(E, F)` pairs.
#[inline]
fn jcm_columns(n: usize, gt: f64, wb: &CoherentAmplitudes) -> [[C64; 2]; 2] {
    let ni = n as i64;
    let up = gt * ((n + 1) as f64).sqrt();
    let down = gt * (n as f64).sqrt();
    let v_e = [C64::new(wb.weight(ni) * up.cos(), 0.0), -I * (wb.weight(ni - 1) * down.sin())];
    let v_g = [-I * (wb.weight(ni + 1) * up.sin()), C64::new(wb.weight(ni) * down.cos(), 0.0)];
    [v_e, v_g]
}

/// Qubit density matrix in the basis `{|e⟩, |g⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity(pub Matrix2<C64>);

impl QubitDensity {
    pub fn from_amplitudes(q: &QubitAmplitudes) -> Self {
        let v = [q.c_e, q.c_g];
        QubitDensity(Matrix2::from_fn(|i, j| v[i] * v[j].conj()))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn ee(&self) -> f64 {
        self.0[(0, 0)].re
    }

    pub fn gg(&self) -> f64 {
        self.0[(1, 1)].re
    }

    pub fn eg(&self) -> C64 {
        self.0[(0, 1)]
    }

    pub fn diagnostics(&self) -> DensityDiagnostics {
        DensityDiagnostics::of(&self.0)
    }

    /// `(ρ_ee, ρ_eg, ρ_ge, ρ_gg)`.
    pub fn vectorize(&self) -> [C64; 4] {
        [self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]]
    }

    pub fn from_vector(v: [C64; 4]) -> Self {
        QubitDensity(Matrix2::new(v[0], v[1], v[2], v[3]))
    }
}

/// Partial trace over both bosonic modes. `ρ_gg` is reported as computed,
/// not as `1 − ρ_ee`.
pub fn reduced_qubit_density(s: &GlobalState) -> QubitDensity {
    let mut ee = 0.0;
    let mut gg = 0.0;
    let mut eg = C64::new(0.0, 0.0);
    for (e, g) in s.e_branch.iter().zip(&s.g_branch) {
        ee += e.norm_sqr();
        gg += g.norm_sqr();
        eg += e * g.conj();
    }
    QubitDensity(Matrix2::new(C64::new(ee, 0.0), eg, eg.conj(), C64::new(gg, 0.0)))
}

/// Whether the qubit vibrates (red-sideband model) or sits still (JCM).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Vibrating,
    Stationary,
}

/// Linear map on the vectorized qubit density `(ρ_ee, ρ_eg, ρ_ge, ρ_gg)`.
///
/// Column `k` is the image of the `k`-th operator basis element
/// `|e⟩⟨e|, |e⟩⟨g|, |g⟩⟨e|, |g⟩⟨g|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    matrix: Matrix4<C64>,
    time: f64,
}

impl ProcessMatrix {
    pub fn identity(time: f64) -> Self {
        ProcessMatrix { matrix: Matrix4::identity(), time }
    }

    pub fn from_matrix(matrix: Matrix4<C64>, time: f64) -> Self {
        ProcessMatrix { matrix, time }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn apply(&self, rho: &QubitDensity) -> QubitDensity {
        let v = nalgebra::Vector4::from(rho.vectorize());
        let out = self.matrix * v;
        QubitDensity::from_vector([out[0], out[1], out[2], out[3]])
    }

    /// Choi matrix `Σ_{xy} |x⟩⟨y| ⊗ Λ(|x⟩⟨y|)`.
    pub fn choi(&self) -> Matrix4<C64> {
        Matrix4::from_fn(|r, c| {
            let (x, i) = (r / 2, r % 2);
            let (y, j) = (c / 2, c % 2);
            self.matrix[(i * 2 + j, x * 2 + y)]
        })
    }

    /// Deviation of `M[ee-row] + M[gg-row]` from `(1, 0, 0, 1)`.
    pub fn trace_preservation_error(&self) -> f64 {
        let target = [1.0, 0.0, 0.0, 1.0];
        (0..4)
            .map(|k| (self.matrix[(0, k)] + self.matrix[(3, k)] - target[k]).norm())
            .fold(0.0, f64::max)
    }
}

/// Process matrix of the single-qubit dynamics at time `t`.
///
/// Each initial basis state `|x⟩` sends the grid point `(m, n)` to the branch
/// pair `v_x = (E, F)`: `v_e = (A, D)`, `v_g = (B, C)`. The image of `|x⟩⟨y|`
/// is then `Σ_{m,n} v_x v_y†`.
pub fn single_qubit_map(
    p: &ModeParams,
    wa: &CoherentAmplitudes,
    wb: &CoherentAmplitudes,
    t: f64,
    motion: Motion,
) -> Result<ProcessMatrix> {
    check_time(t)?;
    p.validate()?;
    // sums[x][y][i][j] = Σ v_x[i] conj(v_y[j])
    let mut sums = [[[[C64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    let mut accumulate = |v: [[C64; 2]; 2]| {
        for x in 0..2 {
            for y in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        sums[x][y][i][j] += v[x][i] * v[y][j].conj();
                    }
                }
            }
        }
    };
    match motion {
        Motion::Vibrating => {
            let phase = p.sideband_rate() * t;
            for m in 0..=wa.n_max() {
                for n in 0..=wb.n_max() {
                    let k = coefficients_unchecked(m, n, phase, wa, wb, DCoefficient::Shifted);
                    accumulate([[k.a, k.d], [k.b, k.c]]);
                }
            }
        }
        Motion::Stationary => {
            let gt = p.stationary_coupling * t;
            for n in 0..=wb.n_max() {
                accumulate(jcm_columns(n, gt, wb));
            }
        }
    }
    let matrix = Matrix4::from_fn(|r, c| {
        let (i, j) = (r / 2, r % 2);
        let (x, y) = (c / 2, c % 2);
        sums[x][y][i][j]
    });
    Ok(ProcessMatrix { matrix, time: t })
}
