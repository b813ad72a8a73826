//! Self-check suite: the closed-form dynamics against the brute-force
//! oracle, exact anchors, the qualitative trends of the model, and density
//! matrix invariants over every sampled point.
//!
//! Every check reports a measured value, the bound it is held to and the
//! verdict. [`run`] executes all of them.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::composite::{bell_state, concurrence, evolve_two_qubit, two_qubit_coherence, BellKind, BellSpec};
use crate::dynamics::{
    evolve_state, evolve_state_with, reduced_qubit_density, single_qubit_map, stationary_evolve, DCoefficient,
    ModeParams, Motion, QubitAmplitudes, QubitDensity,
};
use crate::error::Result;
use crate::fock::CoherentAmplitudes;
use crate::linalg::{max_entry_diff, trace_distance, DensityDiagnostics, C64};
use crate::observables::{l1_coherence, mode_moments};
use crate::oracle::{
    build_red_sideband, embed_global_state, fidelity, product_initial_state, two_subsystem_oracle, OracleConfig,
    Propagator, PropagatorKind,
};
use crate::signal::{first_crossing_below, upper_envelope};

/// Tolerances for one run of the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    /// Coherent-state truncation tolerance for the closed-form side.
    pub tail_tol: f64,
    /// Allowed infidelity between closed-form and oracle states.
    pub fidelity_tol: f64,
    /// Entrywise agreement of the process matrix with direct evolution.
    pub map_tol: f64,
    /// Trace distance between the two-qubit map and the four-mode oracle.
    pub two_qubit_tol: f64,
    pub anchor_tol: f64,
    /// `|C(0)|` bound.
    pub correlation_anchor_tol: f64,
    /// Minimum norm defect the unshifted `D` must show.
    pub unshifted_norm_defect: f64,
    /// Relative window for the Jaynes-Cummings revival time.
    pub revival_rel_tol: f64,
    pub propagator_tol: f64,
    pub hermiticity_tol: f64,
    pub trace_tol: f64,
    pub min_eigenvalue: f64,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            tail_tol: 1e-12,
            fidelity_tol: 1e-8,
            map_tol: 1e-9,
            two_qubit_tol: 1e-6,
            anchor_tol: 1e-9,
            correlation_anchor_tol: 1e-12,
            unshifted_norm_defect: 1e-3,
            revival_rel_tol: 0.15,
            propagator_tol: 1e-10,
            hermiticity_tol: 1e-9,
            trace_tol: 1e-9,
            min_eigenvalue: -1e-8,
        }
    }
}

impl Profile {
    /// Default profile at a coarser truncation. Bounds limited by the
    /// discarded Poisson tail scale with `tail_tol`.
    pub fn with_tail_tol(tail_tol: f64) -> Self {
        let d = Profile::default();
        let scaled = |bound: f64| bound.max(10.0 * tail_tol);
        Profile {
            tail_tol,
            fidelity_tol: scaled(d.fidelity_tol),
            two_qubit_tol: scaled(d.two_qubit_tol),
            anchor_tol: scaled(d.anchor_tol),
            trace_tol: scaled(d.trace_tol),
            ..d
        }
    }
}

/// Which side of the bound passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Above,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
    /// Measured quantities behind `value`, for the report.
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
            Relation::Above => value > bound,
        };
        Check { name: name.into(), value, relation, bound, passed, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.6e} {} {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.relation.symbol(),
            self.bound
        )?;
        if !self.detail.is_empty() {
            write!(f, " [{}]", self.detail)?;
        }
        Ok(())
    }
}

/// Worst density-matrix diagnostics seen so far.
#[derive(Debug, Clone, Copy, Default)]
pub struct Invariants {
    pub worst: DensityDiagnostics,
    pub samples: usize,
}

impl Invariants {
    fn record(&mut self, d: DensityDiagnostics) {
        self.worst = self.worst.worst(d);
        self.samples += 1;
    }

    pub fn absorb(&mut self, other: Invariants) {
        self.worst = self.worst.worst(other.worst);
        self.samples += other.samples;
    }

    fn of(items: impl IntoIterator<Item = DensityDiagnostics>) -> Self {
        let mut inv = Invariants::default();
        items.into_iter().for_each(|d| inv.record(d));
        inv
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} passed, {} failed", self.checks.len(), self.checks.len() - failed, failed)
    }
}

const ETA: f64 = 0.02;
const KAPPA: f64 = 1.0;
const RATE: f64 = ETA * KAPPA;

fn params(alpha_sq: f64, beta_sq: f64) -> ModeParams {
    ModeParams::from_mean_excitations(ETA, KAPPA, alpha_sq, beta_sq).expect("valid parameters")
}

fn linspace(end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * end / (n - 1) as f64).collect()
}

/// Closed-form states against brute-force propagation on the truncated
/// space (one extra Fock level per mode), `(|α|², |β|²) ∈ {0,1,3,5}²`,
/// `c_e ∈ {1, 1/√2}`, 64 times in `[0, 50/(ηκ)]`.
pub fn oracle_equivalence(profile: &Profile) -> Result<(Check, Invariants)> {
    let intensities = [0.0, 1.0, 3.0, 5.0];
    let qubits = [QubitAmplitudes::excited(), QubitAmplitudes::balanced()];
    let mut cases = Vec::new();
    for a in intensities {
        for b in intensities {
            cases.extend(qubits.iter().map(|q| (a, b, *q)));
        }
    }
    let times = linspace(50.0 / RATE, 64);

    let results = cases
        .par_iter()
        .map(|&(a, b, q)| -> Result<(f64, Invariants)> {
            let p = params(a, b);
            let (wa, wb) = p.amplitudes(profile.tail_tol)?;
            let h = build_red_sideband(&p, wa.n_max() + 1, wb.n_max() + 1)?;
            let psi0 = product_initial_state(&q, p.alpha_mag, p.beta_mag, &h);
            let prop = Propagator::new(&h, PropagatorKind::BlockDiagonalization);
            let mut worst = 1.0f64;
            let mut inv = Invariants::default();
            for &t in &times {
                let s = evolve_state(&q, &p, &wa, &wb, t)?;
                inv.record(reduced_qubit_density(&s).diagnostics());
                let exact = prop.evolve(&psi0, t);
                worst = worst.min(fidelity(&embed_global_state(&s, &h)?, &exact)?);
            }
            Ok((worst, inv))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut inv = Invariants::default();
    let mut min_fid = 1.0f64;
    for (f, i) in results {
        min_fid = min_fid.min(f);
        inv.absorb(i);
    }
    // reported as 1 − F so the margin survives formatting
    let check = Check::new("oracle equivalence: max infidelity 1 - F", 1.0 - min_fid, Relation::AtMost, profile.fidelity_tol)
        .with_detail(format!("min fidelity {min_fid:.12}, {} configurations x {} times", cases.len(), times.len()));
    Ok((check, inv))
}

/// Norm defect of the uncorrected `D` coefficient at `|α|² = |β|² = 1`,
/// `ηκt = 2`.
pub fn unshifted_d_norm_defect(profile: &Profile) -> Result<Check> {
    let p = params(1.0, 1.0);
    let (wa, wb) = p.amplitudes(profile.tail_tol)?;
    let t = 2.0 / RATE;
    let s = evolve_state_with(&QubitAmplitudes::excited(), &p, &wa, &wb, t, DCoefficient::Unshifted)?;
    let fixed = evolve_state(&QubitAmplitudes::excited(), &p, &wa, &wb, t)?;
    Ok(Check::new(
        "unshifted D coefficient: norm defect",
        (s.norm_sqr() - 1.0).abs(),
        Relation::Above,
        profile.unshifted_norm_defect,
    )
    .with_detail(format!("shifted D defect {:.1e}", (fixed.norm_sqr() - 1.0).abs())))
}

fn random_qubit(rng: &mut StdRng) -> QubitAmplitudes {
    let cos_theta: f64 = 1.0 - 2.0 * rng.random::<f64>();
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    let half = 0.5 * cos_theta.clamp(-1.0, 1.0).acos();
    QubitAmplitudes::new(C64::new(half.cos(), 0.0), C64::from_polar(half.sin(), phi)).expect("unit vector")
}

/// Process matrix applied to 50 random pure states against direct evolution
/// and partial trace, at 16 times.
pub fn map_consistency(profile: &Profile) -> Result<(Check, Invariants)> {
    let p = params(1.0, 2.0);
    let (wa, wb) = p.amplitudes(profile.tail_tol)?;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let states: Vec<_> = (0..50).map(|_| random_qubit(&mut rng)).collect();
    let times = linspace(50.0 / RATE, 16);
    let mut worst = 0.0f64;
    let mut inv = Invariants::default();
    for &t in &times {
        let map = single_qubit_map(&p, &wa, &wb, t, Motion::Vibrating)?;
        for q in &states {
            let via_map = map.apply(&QubitDensity::from_amplitudes(q));
            let direct = reduced_qubit_density(&evolve_state(q, &p, &wa, &wb, t)?);
            inv.record(via_map.diagnostics());
            worst = worst.max(max_entry_diff(via_map.matrix(), direct.matrix()));
        }
    }
    let check = Check::new("process matrix vs direct evolution: max entry error", worst, Relation::AtMost, profile.map_tol)
        .with_detail(format!("{} states x {} times", states.len(), times.len()));
    Ok((check, inv))
}

/// Tensor-product map against the four-mode oracle, Bell Φ and Ψ,
/// `|α|² = |β|² ∈ {0, 1}`, `n_max = 12`, 16 times in `[0, 20/(ηκ)]`.
pub fn two_qubit_oracle(profile: &Profile) -> Result<(Check, Invariants)> {
    let times = linspace(20.0 / RATE, 16);
    let mut cases = Vec::new();
    for kind in [BellKind::Phi, BellKind::Psi] {
        for x in [0.0, 1.0] {
            cases.extend(times.iter().map(|&t| (kind, x, t)));
        }
    }
    let config = OracleConfig::default();
    let results = cases
        .par_iter()
        .map(|&(kind, x, t)| -> Result<(f64, Invariants)> {
            let p = params(x, x);
            let (wa, wb) = p.amplitudes(profile.tail_tol)?;
            let spec = BellSpec::maximal(kind);
            let map = single_qubit_map(&p, &wa, &wb, t, Motion::Vibrating)?;
            let analytic = evolve_two_qubit(&bell_state(&spec)?, &map, &map)?;
            let oracle = two_subsystem_oracle(&spec, &p, 12, t, &config)?;
            let inv = Invariants::of([analytic.diagnostics(), oracle.diagnostics()]);
            Ok((trace_distance(&analytic.matrix, &oracle.matrix), inv))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut inv = Invariants::default();
    let mut worst = 0.0f64;
    for (d, i) in results {
        worst = worst.max(d);
        inv.absorb(i);
    }
    let check = Check::new("two-qubit map vs four-mode oracle: max trace distance", worst, Relation::AtMost, profile.two_qubit_tol)
        .with_detail(format!("{} cases", cases.len()));
    Ok((check, inv))
}

/// Initial values fixed by construction.
pub fn exact_anchors(profile: &Profile) -> Result<(Vec<Check>, Invariants)> {
    let tol = profile.anchor_tol;
    let mut inv = Invariants::default();
    let mut checks = Vec::new();

    let p = params(1.0, 1.0);
    let (wa, wb) = p.amplitudes(profile.tail_tol)?;
    let zeta0 = |q: &QubitAmplitudes| -> Result<f64> {
        let rho = reduced_qubit_density(&evolve_state(q, &p, &wa, &wb, 0.0)?);
        l1_coherence(rho.matrix())
    };
    let z = zeta0(&QubitAmplitudes::balanced())?;
    checks.push(Check::new("anchor: zeta(0) = 1 for balanced qubit, |error|", (z - 1.0).abs(), Relation::AtMost, tol));
    let z = zeta0(&QubitAmplitudes::excited())?;
    checks.push(Check::new("anchor: zeta(0) = 0 for excited qubit, |value|", z.abs(), Relation::AtMost, tol));

    let bell = bell_state(&BellSpec::maximal(BellKind::Phi))?;
    inv.record(bell.diagnostics());
    let c = concurrence(&bell)?;
    checks.push(Check::new("anchor: concurrence of Bell state = 1, |error|", (c - 1.0).abs(), Relation::AtMost, tol));
    let map = single_qubit_map(&p, &wa, &wb, 0.0, Motion::Vibrating)?;
    let rho = evolve_two_qubit(&bell, &map, &map)?;
    inv.record(rho.diagnostics());
    let c = two_qubit_coherence(&rho)?;
    checks.push(Check::new("anchor: TQC(0) = 1, |error|", (c - 1.0).abs(), Relation::AtMost, tol));

    let intensities = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
    let mut worst = 0.0f64;
    let mut count = 0;
    for &a in &intensities {
        for &b in &intensities {
            let p = params(a, b);
            let (wa, wb) = p.amplitudes(profile.tail_tol)?;
            for q in [QubitAmplitudes::balanced(), QubitAmplitudes::excited(), QubitAmplitudes::ground()] {
                let s = evolve_state(&q, &p, &wa, &wb, 0.0)?;
                inv.record(reduced_qubit_density(&s).diagnostics());
                worst = worst.max(mode_moments(&s).cross_corr.abs());
                count += 1;
            }
        }
    }
    checks.push(
        Check::new("anchor: C(0) = 0, max |C(0)|", worst, Relation::AtMost, profile.correlation_anchor_tol)
            .with_detail(format!("{count} configurations")),
    );
    Ok((checks, inv))
}

/// Sampled curves at `|α|² = 1`, `|β|²` fixed, on the default scenario grid
/// (2001 points over `[0, 100/(ηκ)]`).
struct TrendCurves {
    times: Vec<f64>,
    zeta: Vec<f64>,
    concurrence: Vec<f64>,
    tqc: Vec<f64>,
    inv: Invariants,
}

pub const TREND_BETA_SQ: [f64; 3] = [1.0, 2.0, 4.0];
const TREND_STEPS: usize = 2001;

fn trend_curves(beta_sq: f64, profile: &Profile) -> Result<TrendCurves> {
    let p = params(1.0, beta_sq);
    let (wa, wb) = p.amplitudes(profile.tail_tol)?;
    let times = linspace(100.0 / RATE, TREND_STEPS);
    let bell = bell_state(&BellSpec::maximal(BellKind::Phi))?;
    let rows = times
        .par_iter()
        .map(|&t| -> Result<(f64, f64, f64, [DensityDiagnostics; 2])> {
            let rho1 = reduced_qubit_density(&evolve_state(&QubitAmplitudes::balanced(), &p, &wa, &wb, t)?);
            let map = single_qubit_map(&p, &wa, &wb, t, Motion::Vibrating)?;
            let rho2 = evolve_two_qubit(&bell, &map, &map)?;
            Ok((
                l1_coherence(rho1.matrix())?,
                concurrence(&rho2)?,
                two_qubit_coherence(&rho2)?,
                [rho1.diagnostics(), rho2.diagnostics()],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c = TrendCurves { times, zeta: vec![], concurrence: vec![], tqc: vec![], inv: Invariants::default() };
    for (z, conc, tqc, diags) in rows {
        c.zeta.push(z);
        c.concurrence.push(conc);
        c.tqc.push(tqc);
        diags.into_iter().for_each(|d| c.inv.record(d));
    }
    Ok(c)
}

/// First time the upper envelope drops below `threshold`, in units of
/// `1/(ηκ)`; `None` when it stays above over the whole grid.
fn envelope_crossing(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    first_crossing_below(times, &upper_envelope(times, values), threshold).map(|t| t * RATE)
}

/// Smallest step `x[k+1] − x[k]`, where `None` (never crossed) counts as
/// later than any crossing.
fn min_increment(xs: &[Option<f64>]) -> f64 {
    xs.windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b - a,
            (Some(_), None) => f64::INFINITY,
            (None, Some(_)) => f64::NEG_INFINITY,
            (None, None) => 0.0,
        })
        .fold(f64::INFINITY, f64::min)
}

fn list(xs: &[Option<f64>]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.map_or("never".into(), |t| format!("{t:.3}"))).collect();
    format!("|beta|^2 = 1, 2, 4 -> {}", items.join(", "))
}

/// Dependence of the decay statistics on the cavity intensity at fixed
/// vibrational intensity, plus the sign of the long-time photon-phonon
/// correlation for balanced and excited initial qubits.
pub fn qualitative_trends(profile: &Profile) -> Result<(Vec<Check>, Invariants)> {
    let curves = TREND_BETA_SQ.iter().map(|&b| trend_curves(b, profile)).collect::<Result<Vec<_>>>()?;
    let mut inv = Invariants::default();
    curves.iter().for_each(|c| inv.absorb(c.inv));

    let half: Vec<_> = curves.iter().map(|c| envelope_crossing(&c.times, &c.zeta, 0.5)).collect();
    let extinction: Vec<_> = curves.iter().map(|c| envelope_crossing(&c.times, &c.concurrence, 0.01)).collect();
    let tqc_half: Vec<_> = curves.iter().map(|c| envelope_crossing(&c.times, &c.tqc, 0.5)).collect();

    let mut checks = vec![
        Check::new("trend (a): coherence envelope half-time non-decreasing, min step", min_increment(&half), Relation::AtLeast, 0.0)
            .with_detail(list(&half)),
        Check::new(
            "trend (b): concurrence extinction time non-increasing, max step",
            -min_increment(&extinction.iter().map(|x| x.map(|t| -t)).collect::<Vec<_>>()),
            Relation::AtMost,
            0.0,
        )
        .with_detail(list(&extinction)),
        Check::new("trend (c): TQC envelope half-time non-decreasing, min step", min_increment(&tqc_half), Relation::AtLeast, 0.0)
            .with_detail(list(&tqc_half)),
    ];

    let p = params(1.0, 1.0);
    let (wa, wb) = p.amplitudes(profile.tail_tol)?;
    let window: Vec<f64> = linspace(100.0 / RATE, TREND_STEPS).into_iter().filter(|&t| t >= 50.0 / RATE).collect();
    for (label, q, relation) in [
        ("balanced", QubitAmplitudes::balanced(), Relation::Above),
        ("excited", QubitAmplitudes::excited(), Relation::AtMost),
    ] {
        let samples = window
            .par_iter()
            .map(|&t| -> Result<(f64, DensityDiagnostics)> {
                let s = evolve_state(&q, &p, &wa, &wb, t)?;
                Ok((mode_moments(&s).cross_corr, reduced_qubit_density(&s).diagnostics()))
            })
            .collect::<Result<Vec<_>>>()?;
        let min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        samples.iter().for_each(|s| inv.record(s.1));
        checks.push(Check::new(
            format!("trend (d): min C(t) over [50, 100]/(eta kappa), {label} qubit"),
            min,
            relation,
            0.0,
        ));
    }
    Ok((checks, inv))
}

/// Stationary baseline: the first revival of the Rabi oscillations of `ρ_ee`
/// for `c_e = 1`, `|β|² = 25`, against `2π√25/g`.
pub fn stationary_revival(profile: &Profile) -> Result<(Check, Invariants)> {
    let p = params(0.0, 25.0);
    let g = p.stationary_coupling;
    let wb = CoherentAmplitudes::for_mean_excitation(25.0, profile.tail_tol)?;
    let times = linspace(50.0 / g, 10_001);
    let mut inv = Invariants::default();
    let mut pop = Vec::with_capacity(times.len());
    for &t in &times {
        let rho = reduced_qubit_density(&stationary_evolve(&QubitAmplitudes::excited(), &p, &wb, t)?);
        inv.record(rho.diagnostics());
        pop.push(rho.ee());
    }
    let (t_rev, amplitude) = revival_peak(&times, &pop).unwrap_or((f64::NAN, 0.0));
    let expected = 2.0 * PI * 25f64.sqrt() / g;
    let rel = (t_rev - expected).abs() / expected;
    let check = Check::new("stationary baseline: revival time relative error", rel, Relation::AtMost, profile.revival_rel_tol)
        .with_detail(format!("revival at gt = {:.3}, expected {:.3}, amplitude {:.3}", t_rev * g, expected * g, amplitude));
    Ok((check, inv))
}

/// Time and height of the largest oscillation amplitude after the initial
/// collapse. The amplitude is the gap between the upper and lower envelopes,
/// read from the first local minimum on so both envelopes are anchored on
/// real extrema. The collapse ends where the amplitude first falls below a
/// quarter of its starting value.
pub fn revival_peak(times: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let first_min = (1..values.len().saturating_sub(1)).find(|&i| values[i] <= values[i - 1] && values[i] < values[i + 1])?;
    let upper = upper_envelope(times, values);
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    let lower = upper_envelope(times, &negated);
    let amp: Vec<f64> = upper.iter().zip(&lower).map(|(u, l)| u + l).collect();
    let start = amp[first_min];
    let collapsed = first_min + amp[first_min..].iter().position(|&a| a < 0.25 * start)?;
    let (i, &a) = amp[collapsed..].iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1))?;
    (a > 0.25 * start).then(|| (times[collapsed + i], a))
}

/// Block-diagonal and Taylor propagators on the same coherent input.
pub fn propagator_agreement(profile: &Profile) -> Result<Check> {
    let p = params(3.0, 2.0);
    let (wa, wb) = p.amplitudes(profile.tail_tol)?;
    let h = build_red_sideband(&p, wa.n_max() + 1, wb.n_max() + 1)?;
    let psi0 = product_initial_state(&QubitAmplitudes::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2))?, p.alpha_mag, p.beta_mag, &h);
    let times = linspace(10.0 / RATE, 11);
    let block = Propagator::new(&h, PropagatorKind::BlockDiagonalization).trajectory(&psi0, &times);
    let taylor = Propagator::new(&h, PropagatorKind::Taylor).trajectory(&psi0, &times);
    let worst = block
        .iter()
        .zip(&taylor)
        .flat_map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    Ok(Check::new("block vs Taylor propagator: max amplitude difference", worst, Relation::AtMost, profile.propagator_tol))
}

/// Hermiticity, trace and positivity over every density sampled by the suite.
pub fn density_invariants(inv: &Invariants, profile: &Profile) -> Vec<Check> {
    let n = format!("{} densities", inv.samples);
    vec![
        Check::new("invariants: max Hermiticity error", inv.worst.hermiticity_error, Relation::AtMost, profile.hermiticity_tol)
            .with_detail(n.clone()),
        Check::new("invariants: max trace error", inv.worst.trace_error, Relation::AtMost, profile.trace_tol).with_detail(n.clone()),
        Check::new("invariants: min eigenvalue", inv.worst.min_eigenvalue, Relation::AtLeast, profile.min_eigenvalue).with_detail(n),
    ]
}

/// Runs every check.
pub fn run(profile: &Profile) -> Result<Report> {
    let mut checks = Vec::new();
    let mut inv = Invariants::default();

    let (c, i) = oracle_equivalence(profile)?;
    checks.push(c);
    inv.absorb(i);
    checks.push(unshifted_d_norm_defect(profile)?);
    let (c, i) = map_consistency(profile)?;
    checks.push(c);
    inv.absorb(i);
    let (c, i) = two_qubit_oracle(profile)?;
    checks.push(c);
    inv.absorb(i);
    let (c, i) = exact_anchors(profile)?;
    checks.extend(c);
    inv.absorb(i);
    let (c, i) = qualitative_trends(profile)?;
    checks.extend(c);
    inv.absorb(i);
    let (c, i) = stationary_revival(profile)?;
    checks.push(c);
    inv.absorb(i);
    checks.push(propagator_agreement(profile)?);
    checks.extend(density_invariants(&inv, profile));
    Ok(Report { checks })
}
