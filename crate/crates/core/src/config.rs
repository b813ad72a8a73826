//! Scenario configuration: a flat `key = value` file with optional
//! `[section]` headers, merged with command-line overrides.
//!
//! Keys above the first section are defaults shared by every section. Each
//! section describes one scenario; a file without sections describes a single
//! scenario. Command-line values override both. List-valued intensities
//! (`alpha_sq = 1, 2, 4`) expand into one job per combination.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::composite::{BellKind, BellSpec};
use crate::dynamics::{ModeParams, Motion, QubitAmplitudes, MAX_LAMB_DICKE};
use crate::linalg::C64;
use crate::scenario::{default_t_max, Mode, Scenario, DEFAULT_STEPS, DEFAULT_TAIL_TOL, MAX_TAIL_TOL};

/// Keys understood in files and as overrides.
pub const KEYS: &[&str] = &[
    "mode",
    "stationary",
    "eta",
    "kappa",
    "stationary_coupling",
    "alpha_sq",
    "beta_sq",
    "ce",
    "cg",
    "bell",
    "mu",
    "t_max",
    "steps",
    "tail_tol",
    "out",
];

/// Intensities swept when none are given.
pub const DEFAULT_INTENSITIES: [f64; 3] = [1.0, 2.0, 4.0];

/// Where a setting came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{message}", location(.origin, .key))]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub key: Option<String>,
    pub message: String,
}

fn location(origin: &Option<Origin>, key: &Option<String>) -> String {
    match (origin, key) {
        (Some(o), Some(k)) => format!("{o}: {k}: "),
        (Some(o), None) => format!("{o}: "),
        (None, Some(k)) => format!("{k}: "),
        (None, None) => String::new(),
    }
}

impl ConfigError {
    fn at(origin: &Origin, key: &str, message: impl Into<String>) -> Self {
        ConfigError { origin: Some(origin.clone()), key: Some(key.to_string()), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub value: String,
    pub origin: Origin,
}

/// Key/value pairs from one layer (file defaults, a section, or flags).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, Setting>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>, origin: Origin) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::at(&origin, key, format!("unknown key (expected one of {})", KEYS.join(", "))));
        }
        self.values.insert(key.to_string(), Setting { value: value.into(), origin });
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Setting> {
        self.values.get(key)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `self` overlaid with `other`; `other` wins on conflicts.
    pub fn merged(&self, other: &Settings) -> Settings {
        let mut out = self.clone();
        for (k, v) in &other.values {
            out.values.insert(k.clone(), v.clone());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub settings: Settings,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub defaults: Settings,
    pub sections: Vec<Section>,
}

/// Parses configuration text. Blank lines and lines starting with `#` or
/// `;` are ignored.
pub fn parse_config(text: &str) -> Result<ConfigFile, ConfigError> {
    let mut file = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let origin = Origin::Line(lineno);
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').map(str::trim).ok_or_else(|| ConfigError {
                origin: Some(origin.clone()),
                key: None,
                message: format!("malformed section header '{line}'"),
            })?;
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                return Err(ConfigError {
                    origin: Some(origin),
                    key: None,
                    message: format!("invalid section name '{name}'"),
                });
            }
            if let Some(prev) = file.sections.iter().find(|s| s.name == name) {
                return Err(ConfigError {
                    origin: Some(origin),
                    key: None,
                    message: format!("section [{name}] already defined on line {}", prev.line),
                });
            }
            file.sections.push(Section { name: name.to_string(), line: lineno, settings: Settings::new() });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
            origin: Some(origin.clone()),
            key: None,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let target = match file.sections.last_mut() {
            Some(s) => &mut s.settings,
            None => &mut file.defaults,
        };
        if let Some(prev) = target.get(key) {
            return Err(ConfigError::at(&origin, key, format!("duplicate key (first set at {})", prev.origin)));
        }
        target.set(key, value, origin)?;
    }
    Ok(file)
}

/// Where a job's CSV goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    Stdout,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub scenario: Scenario,
    pub output: Output,
}

/// Expands a parsed file (or none) plus overrides into concrete jobs.
pub fn plan_jobs(file: Option<&ConfigFile>, overrides: &Settings) -> Result<Vec<Job>, ConfigError> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);
    if file.sections.is_empty() {
        return jobs_for(&file.defaults.merged(overrides), None);
    }
    let mut jobs = Vec::new();
    for section in &file.sections {
        let merged = file.defaults.merged(&section.settings).merged(overrides);
        jobs.extend(jobs_for(&merged, Some(&section.name))?);
    }
    Ok(jobs)
}

struct Reader<'a> {
    s: &'a Settings,
}

impl Reader<'_> {
    fn parse<T>(&self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.s.get(key) {
            None => Ok(None),
            Some(set) => f(&set.value).map(Some).map_err(|m| ConfigError::at(&set.origin, key, m)),
        }
    }

    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        match self.s.get(key) {
            Some(set) => ConfigError::at(&set.origin, key, message),
            None => ConfigError { origin: None, key: Some(key.into()), message: message.into() },
        }
    }
}

fn parse_real(v: &str) -> Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("expected a number, got '{v}'"))?;
    if !x.is_finite() {
        return Err(format!("expected a finite number, got '{v}'"));
    }
    Ok(x)
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    let xs = v.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
    if let Some(x) = xs.iter().find(|x| **x < 0.0) {
        return Err(format!("intensities must be non-negative, got {x}"));
    }
    Ok(xs)
}

/// `RE` or `RE,IM`.
pub fn parse_complex(v: &str) -> Result<C64, String> {
    let parts: Vec<&str> = v.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(C64::new(parse_real(re)?, 0.0)),
        [re, im] => Ok(C64::new(parse_real(re)?, parse_real(im)?)),
        _ => Err(format!("expected RE or RE,IM, got '{v}'")),
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn positive(x: f64) -> Result<f64, String> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

/// Accepted deviation from unit norm for user-supplied amplitude pairs,
/// which are then rescaled exactly onto the unit sphere.
pub const AMPLITUDE_NORM_SLACK: f64 = 1e-6;

fn qubit_amplitudes(r: &Reader, mode: Mode) -> Result<QubitAmplitudes, ConfigError> {
    let ce = r.parse("ce", parse_complex)?;
    let cg = r.parse("cg", parse_complex)?;
    let complement = |key: &str, z: C64| -> Result<f64, ConfigError> {
        let rest = 1.0 - z.norm_sqr();
        if rest < -AMPLITUDE_NORM_SLACK {
            return Err(r.fail(key, format!("|{key}|² = {} exceeds 1", z.norm_sqr())));
        }
        Ok(rest.max(0.0).sqrt())
    };
    let (ce, cg) = match (ce, cg) {
        (None, None) => {
            return Ok(match mode {
                Mode::SingleCoherenceExcited => QubitAmplitudes::excited(),
                _ => QubitAmplitudes::balanced(),
            })
        }
        (Some(ce), None) => (ce, C64::new(complement("ce", ce)?, 0.0)),
        (None, Some(cg)) => (C64::new(complement("cg", cg)?, 0.0), cg),
        (Some(ce), Some(cg)) => (ce, cg),
    };
    let norm = (ce.norm_sqr() + cg.norm_sqr()).sqrt();
    if (norm - 1.0).abs() > AMPLITUDE_NORM_SLACK {
        return Err(r.fail("ce", format!("qubit amplitudes must satisfy |ce|² + |cg|² = 1, norm is {norm}")));
    }
    QubitAmplitudes::new(ce / norm, cg / norm).map_err(|e| r.fail("ce", e.to_string()))
}

fn bell_spec(r: &Reader) -> Result<BellSpec, ConfigError> {
    let kind = r
        .parse("bell", |v| match v.trim().to_ascii_lowercase().as_str() {
            "phi" => Ok(BellKind::Phi),
            "psi" => Ok(BellKind::Psi),
            _ => Err(format!("expected phi or psi, got '{v}'")),
        })?
        .unwrap_or(BellKind::Phi);
    match r.parse("mu", parse_real)? {
        None => Ok(BellSpec::maximal(kind)),
        Some(mu) => {
            if !(0.0..=1.0).contains(&mu) {
                return Err(r.fail("mu", format!("must lie in [0, 1], got {mu}")));
            }
            let upsilon = (1.0 - mu * mu).max(0.0).sqrt();
            BellSpec::new(kind, C64::new(mu, 0.0), C64::new(upsilon, 0.0)).map_err(|e| r.fail("mu", e.to_string()))
        }
    }
}

fn tag(x: f64) -> String {
    format!("{x}")
}

fn jobs_for(s: &Settings, section: Option<&str>) -> Result<Vec<Job>, ConfigError> {
    let r = Reader { s };
    let (mode, mut motion) = r
        .parse("mode", |v| {
            Mode::parse(v.trim()).ok_or_else(|| {
                let names: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
                format!("unknown mode '{v}' (expected one of {}, optionally prefixed with 'stationary-')", names.join(", "))
            })
        })?
        .unwrap_or((Mode::SingleCoherence, Motion::Vibrating));
    if r.parse("stationary", parse_bool)?.unwrap_or(false) {
        motion = Motion::Stationary;
    }

    let eta = r.parse("eta", parse_real)?.unwrap_or(0.02);
    if !(eta > 0.0 && eta <= MAX_LAMB_DICKE) {
        return Err(r.fail("eta", format!("must lie in (0, {MAX_LAMB_DICKE}], got {eta}")));
    }
    let kappa = r.parse("kappa", |v| parse_real(v).and_then(positive))?.unwrap_or(1.0);
    let coupling = r.parse("stationary_coupling", |v| parse_real(v).and_then(positive))?.unwrap_or(kappa);
    let alphas = r.parse("alpha_sq", parse_list)?.unwrap_or_else(|| DEFAULT_INTENSITIES.to_vec());
    let betas = r.parse("beta_sq", parse_list)?.unwrap_or_else(|| DEFAULT_INTENSITIES.to_vec());
    // the stationary baseline has no vibrational mode
    let alphas = if motion == Motion::Stationary { vec![0.0] } else { alphas };

    let t_max = r.parse("t_max", |v| parse_real(v).and_then(positive))?;
    let steps = r
        .parse("steps", |v| {
            let n: usize = v.trim().parse().map_err(|_| format!("expected an integer, got '{v}'"))?;
            if n < 2 {
                return Err(format!("must be at least 2, got {n}"));
            }
            Ok(n)
        })?
        .unwrap_or(DEFAULT_STEPS);
    let tail_tol = r
        .parse("tail_tol", |v| {
            let x = parse_real(v)?;
            if x > 0.0 && x <= MAX_TAIL_TOL {
                Ok(x)
            } else {
                Err(format!("must lie in (0, {MAX_TAIL_TOL:e}], got {x}"))
            }
        })?
        .unwrap_or(DEFAULT_TAIL_TOL);
    let qubit = qubit_amplitudes(&r, mode)?;
    let bell = bell_spec(&r)?;

    let full = mode.full_name(motion);
    let out = r.s.get("out").map(|o| o.value.trim().to_string());
    let combos: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    if out.as_deref() == Some("-") && combos.len() > 1 {
        return Err(r.fail("out", format!("{} intensity combinations cannot all go to stdout", combos.len())));
    }
    let base = PathBuf::from(out.unwrap_or_else(|| format!("{}.csv", section.unwrap_or(&full))));

    combos
        .into_iter()
        .map(|(a, b)| {
            let params = ModeParams::from_mean_excitations(eta, kappa, a, b)
                .and_then(|p| p.with_stationary_coupling(coupling))
                .map_err(|e| ConfigError { origin: None, key: None, message: e.to_string() })?;
            let mut scenario = Scenario::new(mode, motion, params);
            scenario.qubit = qubit;
            scenario.bell = bell;
            scenario.t_max = t_max.unwrap_or_else(|| default_t_max(&params, motion));
            scenario.n_steps = steps;
            scenario.tail_tol = tail_tol;
            let output = if base.as_os_str() == "-" {
                Output::Stdout
            } else if alphas.len() * betas.len() == 1 {
                Output::File(base.clone())
            } else {
                let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let ext = base.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
                let name = match motion {
                    Motion::Vibrating => format!("{stem}_a{}_b{}.{ext}", tag(a), tag(b)),
                    Motion::Stationary => format!("{stem}_b{}.{ext}", tag(b)),
                };
                Output::File(base.with_file_name(name))
            };
            Ok(Job { scenario, output })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::new();
        for (k, v) in pairs {
            s.set(k, *v, Origin::Flag(k.replace('_', "-"))).unwrap();
        }
        s
    }

    #[test]
    fn defaults_sweep_nine_combinations() {
        let jobs = plan_jobs(None, &Settings::new()).unwrap();
        assert_eq!(jobs.len(), 9);
        assert_eq!(jobs[0].output, Output::File("single-coherence_a1_b1.csv".into()));
        assert_eq!(jobs[5].output, Output::File("single-coherence_a2_b4.csv".into()));
        let s = &jobs[0].scenario;
        assert_eq!((s.params.eta, s.params.kappa), (0.02, 1.0));
        assert_eq!(s.qubit, QubitAmplitudes::balanced());
        assert_eq!(s.t_max, 5000.0);
    }

    #[test]
    fn single_combination_writes_the_named_file() {
        let f = flags(&[("alpha_sq", "2"), ("beta_sq", "3"), ("out", "x/run.csv"), ("mode", "tqc")]);
        let jobs = plan_jobs(None, &f).unwrap();
        assert_eq!(jobs.len(), 1);
        assert_eq!(jobs[0].output, Output::File("x/run.csv".into()));
        assert!((jobs[0].scenario.beta_sq() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sections_inherit_defaults_and_flags_win() {
        let text = "\
# shared
eta = 0.03
beta_sq = 1
steps = 11

[fig1]
mode = single-coherence
alpha_sq = 1, 2

[fig4]
mode = stationary-concurrence
beta_sq = 4
eta = 0.01
";
        let file = parse_config(text).unwrap();
        assert_eq!(file.sections.len(), 2);
        let jobs = plan_jobs(Some(&file), &flags(&[("steps", "21")])).unwrap();
        assert_eq!(jobs.len(), 3);
        assert_eq!(jobs[0].output, Output::File("fig1_a1_b1.csv".into()));
        assert_eq!(jobs[1].output, Output::File("fig1_a2_b1.csv".into()));
        assert_eq!(jobs[0].scenario.params.eta, 0.03);
        assert!(jobs.iter().all(|j| j.scenario.n_steps == 21));
        let stationary = &jobs[2].scenario;
        assert_eq!(stationary.motion, Motion::Stationary);
        assert_eq!(stationary.params.eta, 0.01);
        assert_eq!(stationary.t_max, 100.0);
        assert_eq!(jobs[2].output, Output::File("fig4.csv".into()));
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = parse_config("eta = 0.02\n\nfrobnicate = 3\n").unwrap_err();
        assert_eq!(err.origin, Some(Origin::Line(3)));
        assert!(err.to_string().starts_with("line 3: frobnicate: unknown key"));

        let err = parse_config("[a\n").unwrap_err();
        assert_eq!(err.origin, Some(Origin::Line(1)));

        let err = parse_config("eta 0.02\n").unwrap_err();
        assert!(err.to_string().contains("expected 'key = value'"));

        let err = parse_config("[a]\n[a]\n").unwrap_err();
        assert_eq!(err.origin, Some(Origin::Line(2)));

        let err = parse_config("eta = 1\neta = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));

        let file = parse_config("mode = tqc\n\neta = abc\n").unwrap();
        let err = plan_jobs(Some(&file), &Settings::new()).unwrap_err();
        assert_eq!(err.to_string(), "line 3: eta: expected a number, got 'abc'");

        let file = parse_config("eta = 0.5\n").unwrap();
        let err = plan_jobs(Some(&file), &Settings::new()).unwrap_err();
        assert!(err.to_string().starts_with("line 1: eta: must lie in"));

        let err = plan_jobs(None, &flags(&[("mode", "wobble")])).unwrap_err();
        assert!(err.to_string().starts_with("flag --mode: mode: unknown mode 'wobble'"));
    }

    #[test]
    fn qubit_amplitudes_from_flags() {
        let jobs = plan_jobs(None, &flags(&[("ce", "1"), ("alpha_sq", "1"), ("beta_sq", "1")])).unwrap();
        assert_eq!(jobs[0].scenario.qubit, QubitAmplitudes::excited());

        let f = flags(&[("ce", "0.7071068,0"), ("cg", "0,0.7071068"), ("alpha_sq", "1"), ("beta_sq", "1")]);
        let q = plan_jobs(None, &f).unwrap()[0].scenario.qubit;
        assert!((q.c_e.norm_sqr() + q.c_g.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((q.c_g.im - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);

        assert!(plan_jobs(None, &flags(&[("ce", "1"), ("cg", "1")])).is_err());
        assert!(plan_jobs(None, &flags(&[("ce", "1.5")])).is_err());
        assert!(plan_jobs(None, &flags(&[("ce", "1,2,3")])).is_err());

        let jobs = plan_jobs(None, &flags(&[("mode", "single-coherence-excited"), ("beta_sq", "1")])).unwrap();
        assert!(jobs.iter().all(|j| j.scenario.qubit == QubitAmplitudes::excited()));
    }

    #[test]
    fn bell_settings() {
        let f = flags(&[("mode", "concurrence"), ("bell", "PSI"), ("mu", "0.6"), ("alpha_sq", "1"), ("beta_sq", "1")]);
        let b = plan_jobs(None, &f).unwrap()[0].scenario.bell;
        assert_eq!(b.kind, BellKind::Psi);
        assert!((b.upsilon.re - 0.8).abs() < 1e-15);
        assert!(plan_jobs(None, &flags(&[("bell", "ghz")])).is_err());
        assert!(plan_jobs(None, &flags(&[("mu", "1.2")])).is_err());
    }

    #[test]
    fn stationary_flag_and_stdout() {
        let f = flags(&[("stationary", "true"), ("beta_sq", "1,4"), ("mode", "tqc")]);
        let jobs = plan_jobs(None, &f).unwrap();
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[1].output, Output::File("stationary-tqc_b4.csv".into()));
        assert_eq!(jobs[0].scenario.alpha_sq(), 0.0);

        let err = plan_jobs(None, &flags(&[("out", "-")])).unwrap_err();
        assert!(err.to_string().contains("stdout"));
        let jobs = plan_jobs(None, &flags(&[("out", "-"), ("alpha_sq", "1"), ("beta_sq", "1")])).unwrap();
        assert_eq!(jobs[0].output, Output::Stdout);
    }

    #[test]
    fn rejects_bad_numbers() {
        for (k, v) in [("steps", "1"), ("steps", "2.5"), ("t_max", "-1"), ("tail_tol", "0"), ("tail_tol", "1e-3"), ("kappa", "0"), ("alpha_sq", "1,-2")] {
            let err = plan_jobs(None, &flags(&[(k, v)])).unwrap_err();
            assert_eq!(err.key.as_deref(), Some(k), "{k} = {v}");
        }
    }
}
