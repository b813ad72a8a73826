use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ionqed::config::{parse_config, plan_jobs, ConfigError, Origin, Output, Settings};
use ionqed::plot::{emit_plot_script, PlotError};
use ionqed::scenario::{run_scenario, with_workers};
use ionqed::verify::{self, Profile};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "ionqed", version, about = "Coherence and entanglement dynamics of vibrating trapped-ion qubits in cavities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run time sweeps and write one CSV file per intensity combination.
    Run(Box<RunArgs>),
    /// Run the self-check suite against the brute-force oracle.
    Verify(VerifyArgs),
    /// Print a gnuplot script for a CSV file written by `run`.
    PlotScript(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (`key = value` lines, optional `[section]`s).
    #[arg(long)]
    config: Option<PathBuf>,
    /// single-coherence, single-coherence-excited, mode-correlation,
    /// concurrence or tqc, optionally prefixed with `stationary-`.
    #[arg(long)]
    mode: Option<String>,
    /// Vibrational mean excitation(s), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    alpha_sq: Option<String>,
    /// Cavity mean excitation(s), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    beta_sq: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    /// Excited-state amplitude as RE,IM.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    ce: Option<String>,
    /// Ground-state amplitude as RE,IM.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    cg: Option<String>,
    /// Initial two-qubit state: phi or psi.
    #[arg(long)]
    bell: Option<String>,
    /// Real weight of the first Bell component.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tail_tol: Option<String>,
    /// Output CSV path (`-` for stdout). Sweeps append `_a<x>_b<y>`.
    #[arg(long)]
    out: Option<String>,
    /// Use the stationary-qubit baseline.
    #[arg(long)]
    stationary: bool,
    #[arg(long, env = "IONQED_WORKERS")]
    workers: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Settings, ConfigError> {
        let mut s = Settings::new();
        let flags = [
            ("mode", "mode", &self.mode),
            ("alpha_sq", "alpha-sq", &self.alpha_sq),
            ("beta_sq", "beta-sq", &self.beta_sq),
            ("eta", "eta", &self.eta),
            ("kappa", "kappa", &self.kappa),
            ("ce", "ce", &self.ce),
            ("cg", "cg", &self.cg),
            ("bell", "bell", &self.bell),
            ("mu", "mu", &self.mu),
            ("t_max", "t-max", &self.t_max),
            ("steps", "steps", &self.steps),
            ("tail_tol", "tail-tol", &self.tail_tol),
            ("out", "out", &self.out),
        ];
        for (key, flag, value) in flags {
            if let Some(v) = value {
                s.set(key, v.as_str(), Origin::Flag(flag.into()))?;
            }
        }
        if self.stationary {
            s.set("stationary", "true", Origin::Flag("stationary".into()))?;
        }
        Ok(s)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Coherent-state truncation tolerance; tail-limited bounds scale with it.
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long, env = "IONQED_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// CSV file written by `run`.
    csv: PathBuf,
    /// Mode of the CSV when it carries no `# mode` line.
    #[arg(long)]
    mode: Option<String>,
    /// Script path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn library_exit(e: &ionqed::Error) -> u8 {
    match e {
        ionqed::Error::Parameter(_) => EXIT_USAGE,
        ionqed::Error::Resource { .. } => EXIT_RESOURCE,
    }
}

fn write_output(path: &Path, contents: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    contents(&mut w)?;
    w.flush()
}

fn run(args: RunArgs) -> ExitCode {
    let file = match &args.config {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_USAGE, format!("cannot read {}: {e}", path.display())),
            };
            match parse_config(&text) {
                Ok(f) => Some(f),
                Err(e) => return fail(EXIT_USAGE, format!("{}: {e}", path.display())),
            }
        }
        None => None,
    };
    let jobs = match args.overrides().and_then(|o| plan_jobs(file.as_ref(), &o)) {
        Ok(j) => j,
        Err(e) => {
            let prefix = match (&e.origin, &args.config) {
                (Some(Origin::Line(_)), Some(p)) => format!("{}: ", p.display()),
                _ => String::new(),
            };
            return fail(EXIT_USAGE, format!("{prefix}{e}"));
        }
    };

    for job in jobs {
        let table = match with_workers(args.workers, || run_scenario(&job.scenario)) {
            Ok(t) => t,
            Err(e) => return fail(library_exit(&e), e),
        };
        let written = match &job.output {
            Output::Stdout => table.write_csv(io::stdout().lock()),
            Output::File(path) => write_output(path, |w| table.write_csv(w)),
        };
        match (written, &job.output) {
            (Err(e), Output::File(path)) => return fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display())),
            (Err(e), Output::Stdout) => return fail(EXIT_USAGE, format!("cannot write to stdout: {e}")),
            (Ok(()), Output::File(path)) => log::info!("wrote {} ({} rows)", path.display(), table.rows.len()),
            (Ok(()), Output::Stdout) => {}
        }
    }
    ExitCode::SUCCESS
}

fn verify_cmd(args: VerifyArgs) -> ExitCode {
    let profile = match args.tail_tol {
        None => Profile::default(),
        Some(t) if t > 0.0 && t <= ionqed::scenario::MAX_TAIL_TOL => Profile::with_tail_tol(t),
        Some(t) => {
            return fail(EXIT_USAGE, format!("--tail-tol must lie in (0, {:e}], got {t}", ionqed::scenario::MAX_TAIL_TOL))
        }
    };
    match with_workers(args.workers, || verify::run(&profile)) {
        Ok(report) => {
            println!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Err(e) => fail(library_exit(&e), e),
    }
}

fn plot_cmd(args: PlotArgs) -> ExitCode {
    let script = match emit_plot_script(&args.csv, args.mode.as_deref()) {
        Ok(s) => s,
        Err(e @ (PlotError::Io { .. } | PlotError::Malformed { .. })) => return fail(EXIT_USAGE, e),
    };
    match &args.out {
        None => {
            print!("{script}");
            ExitCode::SUCCESS
        }
        Some(path) => match write_output(path, |w| w.write_all(script.as_bytes())) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display())),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(*args),
        Command::Verify(args) => verify_cmd(args),
        Command::PlotScript(args) => plot_cmd(args),
    }
}
