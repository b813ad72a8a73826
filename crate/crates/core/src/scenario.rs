//! Time sweeps behind the command-line tool, and their CSV rendering.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::composite::{bell_state, concurrence, evolve_two_qubit, two_qubit_coherence, BellKind, BellSpec};
use crate::dynamics::{
    evolve_state, reduced_qubit_density, single_qubit_map, stationary_evolve, GlobalState, ModeParams, Motion,
    QubitAmplitudes,
};
use crate::error::{Error, Result};
use crate::fock::CoherentAmplitudes;
use crate::observables::{l1_coherence, mode_moments};

pub const DEFAULT_STEPS: usize = 2001;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Coarsest truncation accepted; keeps the trace loss of the two-qubit map
/// inside [`crate::composite::TRACE_SLACK`].
pub const MAX_TAIL_TOL: f64 = 1e-5;
/// Default horizon in units of the dimensionless time (ηκt or gt).
pub const DEFAULT_SCALED_HORIZON: f64 = 100.0;
/// Largest state grid a single evaluation may allocate.
pub const GRID_BUDGET_BYTES: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SingleCoherence,
    SingleCoherenceExcited,
    ModeCorrelation,
    Concurrence,
    Tqc,
}

impl Mode {
    pub const ALL: [Mode; 5] =
        [Mode::SingleCoherence, Mode::SingleCoherenceExcited, Mode::ModeCorrelation, Mode::Concurrence, Mode::Tqc];

    pub fn name(self) -> &'static str {
        match self {
            Mode::SingleCoherence => "single-coherence",
            Mode::SingleCoherenceExcited => "single-coherence-excited",
            Mode::ModeCorrelation => "mode-correlation",
            Mode::Concurrence => "concurrence",
            Mode::Tqc => "tqc",
        }
    }

    /// Parses a mode name; a `stationary-` prefix selects the stationary
    /// baseline.
    pub fn parse(s: &str) -> Option<(Mode, Motion)> {
        let (rest, motion) = match s.strip_prefix("stationary-") {
            Some(rest) => (rest, Motion::Stationary),
            None => (s, Motion::Vibrating),
        };
        Mode::ALL.into_iter().find(|m| m.name() == rest).map(|m| (m, motion))
    }

    pub fn full_name(self, motion: Motion) -> String {
        match motion {
            Motion::Vibrating => self.name().to_string(),
            Motion::Stationary => format!("stationary-{}", self.name()),
        }
    }

    pub fn columns(self, motion: Motion) -> Vec<&'static str> {
        let mut cols = vec!["t", scaled_time_column(motion)];
        match self {
            Mode::SingleCoherence | Mode::SingleCoherenceExcited => cols.push("zeta"),
            Mode::ModeCorrelation => cols.extend(["n_a", "n_b", "joint", "cross_corr", "g2"]),
            Mode::Concurrence | Mode::Tqc => cols.push("value"),
        }
        cols
    }

    fn is_two_qubit(self) -> bool {
        matches!(self, Mode::Concurrence | Mode::Tqc)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn scaled_time_column(motion: Motion) -> &'static str {
    match motion {
        Motion::Vibrating => "eta_kappa_t",
        Motion::Stationary => "coupling_t",
    }
}

/// One time sweep at fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub motion: Motion,
    pub params: ModeParams,
    /// Initial qubit for the single-qubit modes.
    pub qubit: QubitAmplitudes,
    /// Initial two-qubit state for the concurrence and TQC modes.
    pub bell: BellSpec,
    pub t_max: f64,
    pub n_steps: usize,
    pub tail_tol: f64,
}

impl Scenario {
    /// Scenario with every optional setting at its default.
    pub fn new(mode: Mode, motion: Motion, params: ModeParams) -> Self {
        let qubit = match mode {
            Mode::SingleCoherenceExcited => QubitAmplitudes::excited(),
            _ => QubitAmplitudes::balanced(),
        };
        Scenario {
            mode,
            motion,
            params,
            qubit,
            bell: BellSpec::maximal(BellKind::Phi),
            t_max: default_t_max(&params, motion),
            n_steps: DEFAULT_STEPS,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_steps < 2 {
            return Err(Error::param(format!("steps must be at least 2, got {}", self.n_steps)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::param(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol <= MAX_TAIL_TOL) {
            return Err(Error::param(format!("tail_tol must lie in (0, {MAX_TAIL_TOL:e}], got {}", self.tail_tol)));
        }
        QubitAmplitudes::new(self.qubit.c_e, self.qubit.c_g)?;
        BellSpec::new(self.bell.kind, self.bell.mu, self.bell.upsilon)?;
        Ok(())
    }

    pub fn alpha_sq(&self) -> f64 {
        self.params.alpha_mag * self.params.alpha_mag
    }

    pub fn beta_sq(&self) -> f64 {
        self.params.beta_mag * self.params.beta_mag
    }

    /// Rate that turns `t` into the dimensionless time column.
    pub fn time_scale(&self) -> f64 {
        match self.motion {
            Motion::Vibrating => self.params.sideband_rate(),
            Motion::Stationary => self.params.stationary_coupling,
        }
    }

    /// `t_i = i·t_max/(n_steps − 1)`.
    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_steps - 1) as f64;
        (0..self.n_steps).map(|i| i as f64 * self.t_max / last).collect()
    }

    fn metadata(&self, wa: &CoherentAmplitudes, wb: &CoherentAmplitudes) -> Vec<(String, String)> {
        let c = |z: crate::C64| format!("{},{}", format_number(z.re), format_number(z.im));
        let mut meta = vec![
            ("mode".to_string(), self.mode.full_name(self.motion)),
            ("eta".into(), format_number(self.params.eta)),
            ("kappa".into(), format_number(self.params.kappa)),
        ];
        match self.motion {
            Motion::Vibrating => meta.push(("alpha_sq".into(), format_number(self.alpha_sq()))),
            Motion::Stationary => {
                meta.push(("stationary_coupling".into(), format_number(self.params.stationary_coupling)))
            }
        }
        meta.push(("beta_sq".into(), format_number(self.beta_sq())));
        if self.mode.is_two_qubit() {
            let kind = match self.bell.kind {
                BellKind::Phi => "phi",
                BellKind::Psi => "psi",
            };
            meta.push(("bell".into(), kind.into()));
            meta.push(("mu".into(), c(self.bell.mu)));
            meta.push(("upsilon".into(), c(self.bell.upsilon)));
        } else {
            meta.push(("ce".into(), c(self.qubit.c_e)));
            meta.push(("cg".into(), c(self.qubit.c_g)));
        }
        meta.push(("t_max".into(), format_number(self.t_max)));
        meta.push(("steps".into(), self.n_steps.to_string()));
        meta.push(("tail_tol".into(), format_number(self.tail_tol)));
        if self.motion == Motion::Vibrating {
            meta.push(("n_max_a".into(), wa.n_max().to_string()));
        }
        meta.push(("n_max_b".into(), wb.n_max().to_string()));
        meta
    }
}

/// `100/(ηκ)` for a vibrating qubit, `100/g` for the stationary baseline.
pub fn default_t_max(params: &ModeParams, motion: Motion) -> f64 {
    let rate = match motion {
        Motion::Vibrating => params.sideband_rate(),
        Motion::Stationary => params.stationary_coupling,
    };
    DEFAULT_SCALED_HORIZON / rate
}

/// A rendered sweep: `#` metadata, a header row, then one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format_number(*x));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Scientific notation with nine significant digits and a signed two-digit
/// exponent, e.g. `1.00000000e+00`. Non-finite values print as `nan`, `inf`
/// or `-inf`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.8e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn check_grid_budget(wa: &CoherentAmplitudes, wb: &CoherentAmplitudes, motion: Motion) -> Result<()> {
    let na = match motion {
        Motion::Vibrating => wa.n_max() as u64 + 1,
        Motion::Stationary => 1,
    };
    let required = 2 * na * (wb.n_max() as u64 + 1) * std::mem::size_of::<crate::C64>() as u64;
    if required > GRID_BUDGET_BYTES {
        return Err(Error::Resource { required, budget: GRID_BUDGET_BYTES });
    }
    Ok(())
}

/// Evaluates the sweep. Rows are computed in parallel on the current rayon
/// pool and assembled in time order, so the result does not depend on the
/// worker count.
pub fn run_scenario(s: &Scenario) -> Result<Table> {
    s.validate()?;
    let (wa, wb) = s.params.amplitudes(s.tail_tol)?;
    check_grid_budget(&wa, &wb, s.motion)?;
    let times = s.times();
    let scale = s.time_scale();
    let rho0 = bell_state(&s.bell)?;

    let global = |t: f64| -> Result<GlobalState> {
        match s.motion {
            Motion::Vibrating => evolve_state(&s.qubit, &s.params, &wa, &wb, t),
            Motion::Stationary => stationary_evolve(&s.qubit, &s.params, &wb, t),
        }
    };

    let rows = times
        .par_iter()
        .map(|&t| -> Result<Vec<f64>> {
            let mut row = vec![t, scale * t];
            match s.mode {
                Mode::SingleCoherence | Mode::SingleCoherenceExcited => {
                    let rho = reduced_qubit_density(&global(t)?);
                    row.push(l1_coherence(rho.matrix())?);
                }
                Mode::ModeCorrelation => {
                    let c = mode_moments(&global(t)?);
                    row.extend([c.n_a_mean, c.n_b_mean, c.joint_mean, c.cross_corr, c.g2.unwrap_or(f64::NAN)]);
                }
                Mode::Concurrence | Mode::Tqc => {
                    let map = single_qubit_map(&s.params, &wa, &wb, t, s.motion)?;
                    let rho = evolve_two_qubit(&rho0, &map, &map)?;
                    row.push(if s.mode == Mode::Concurrence { concurrence(&rho)? } else { two_qubit_coherence(&rho)? });
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Table { metadata: s.metadata(&wa, &wb), columns: s.mode.columns(s.motion), rows })
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None` or zero. Results of [`run_scenario`] are the same
/// either way.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not start {n} workers ({e}); using the global pool");
                f()
            }
        },
        _ => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(mode: Mode, motion: Motion) -> Scenario {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 1.0, 2.0).unwrap();
        let mut s = Scenario::new(mode, motion, p);
        s.n_steps = 41;
        s
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(1.0), "1.00000000e+00");
        assert_eq!(format_number(-0.0), "0.00000000e+00");
        assert_eq!(format_number(0.0), "0.00000000e+00");
        assert_eq!(format_number(-1234.5678912), "-1.23456789e+03");
        assert_eq!(format_number(3.2e-105), "3.20000000e-105");
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            for motion in [Motion::Vibrating, Motion::Stationary] {
                assert_eq!(Mode::parse(&m.full_name(motion)), Some((m, motion)));
            }
        }
        assert_eq!(Mode::parse("coherence"), None);
        assert_eq!(Mode::parse("stationary-"), None);
    }

    #[test]
    fn first_rows() {
        let t = run_scenario(&scenario(Mode::SingleCoherence, Motion::Vibrating)).unwrap();
        assert_eq!(t.columns, ["t", "eta_kappa_t", "zeta"]);
        assert!((t.rows[0][2] - 1.0).abs() < 1e-12);

        let t = run_scenario(&scenario(Mode::SingleCoherenceExcited, Motion::Vibrating)).unwrap();
        assert_eq!(t.rows[0][2], 0.0);

        let t = run_scenario(&scenario(Mode::ModeCorrelation, Motion::Vibrating)).unwrap();
        assert_eq!(t.columns, ["t", "eta_kappa_t", "n_a", "n_b", "joint", "cross_corr", "g2"]);
        assert!(t.rows[0][5].abs() < 1e-12);

        for mode in [Mode::Concurrence, Mode::Tqc] {
            let t = run_scenario(&scenario(mode, Motion::Vibrating)).unwrap();
            assert_eq!(t.columns, ["t", "eta_kappa_t", "value"]);
            // truncation tail only
            assert!((t.rows[0][2] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn time_grid() {
        let s = scenario(Mode::SingleCoherence, Motion::Vibrating);
        assert_eq!(s.t_max, 5000.0);
        let t = run_scenario(&s).unwrap();
        assert_eq!(t.rows.len(), 41);
        for (i, row) in t.rows.iter().enumerate() {
            assert_eq!(row[0], i as f64 * 5000.0 / 40.0);
            assert!((row[1] - 0.02 * row[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_uses_coupling_time() {
        let s = scenario(Mode::ModeCorrelation, Motion::Stationary);
        assert_eq!(s.t_max, 100.0);
        let t = run_scenario(&s).unwrap();
        assert_eq!(t.columns[1], "coupling_t");
        // no vibrational mode: ⟨n_a⟩ = 0 and G² is undefined
        assert!(t.rows.iter().all(|r| r[2] == 0.0 && r[6].is_nan()));
        assert!(t.to_csv_string().contains(",nan\n"));
    }

    #[test]
    fn invalid_scenarios() {
        let mut s = scenario(Mode::Tqc, Motion::Vibrating);
        s.n_steps = 1;
        assert!(matches!(run_scenario(&s), Err(Error::Parameter(_))));
        let mut s = scenario(Mode::Tqc, Motion::Vibrating);
        s.t_max = 0.0;
        assert!(run_scenario(&s).is_err());
    }

    #[test]
    fn oversized_grid_is_a_resource_error() {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 2.0e6, 2.0e6).unwrap();
        let s = Scenario::new(Mode::SingleCoherence, Motion::Vibrating, p);
        assert!(matches!(run_scenario(&s), Err(Error::Resource { .. })));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let s = scenario(Mode::Concurrence, Motion::Vibrating);
        let one = with_workers(Some(1), || run_scenario(&s).unwrap().to_csv_string());
        let four = with_workers(Some(4), || run_scenario(&s).unwrap().to_csv_string());
        assert_eq!(one, four);
    }

    #[test]
    fn csv_layout() {
        let t = run_scenario(&scenario(Mode::Concurrence, Motion::Vibrating)).unwrap();
        let csv = t.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# mode = concurrence"));
        let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "t,eta_kappa_t,value");
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 42);
        assert!(csv.contains("\n0.00000000e+00,0.00000000e+00,1.00000000e+00\n"));
    }
}
