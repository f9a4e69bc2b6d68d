use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod figures;
mod sweep;

use config::Settings;

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Config {
        field: String,
        message: String,
    },
    /// Numerical failure; exit code 3.
    Solver {
        message: String,
        t: Option<f64>,
    },
    Io(String),
    /// Self-validation found failing checks.
    Validation,
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver { .. } => 3,
            CliError::Io(_) | CliError::Validation => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "invalid {field}: {message}"),
            CliError::Solver {
                message,
                t: Some(t),
            } => write!(f, "solver failed at t = {t}: {message}"),
            CliError::Solver { message, t: None } => write!(f, "solver failed: {message}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Validation => write!(f, "validation failed"),
        }
    }
}

impl From<photonq::Error> for CliError {
    fn from(e: photonq::Error) -> Self {
        match e {
            photonq::Error::InvalidInput { field, reason } => CliError::Config {
                field,
                message: reason,
            },
            photonq::Error::Profile(m) => CliError::config("profile", m),
            other => CliError::Solver {
                t: other.failing_time(),
                message: other.to_string(),
            },
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Single-photon driven qubit dynamics: trajectories, map coefficients,
/// generator rates and non-Markovianity witnesses.
#[derive(Parser, Debug)]
#[command(name = "photonq", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Global {
    /// Total decay rate Γ
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Fraction κ of Γ coupled to the photon channel
    #[arg(long, global = true, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Detuning Δ₀
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta0: Option<f64>,
    /// Photon profile: zero, exp:ALPHA, optimal:T or sampled:PATH
    #[arg(long, global = true)]
    profile: Option<String>,
    /// End of the output grid (default 15/Γ)
    #[arg(long, global = true, allow_negative_numbers = true)]
    t_max: Option<f64>,
    /// Number of grid points (default 1501)
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Relative ODE tolerance (default 1e-9)
    #[arg(long, global = true, allow_negative_numbers = true)]
    rel_tol: Option<f64>,
    /// Absolute ODE tolerance (default 1e-11)
    #[arg(long, global = true, allow_negative_numbers = true)]
    abs_tol: Option<f64>,
    /// Initial excited population
    #[arg(long, global = true, allow_negative_numbers = true)]
    pe0: Option<f64>,
    /// Initial coherence, real part
    #[arg(long, global = true, allow_negative_numbers = true)]
    re_coh0: Option<f64>,
    /// Initial coherence, imaginary part
    #[arg(long, global = true, allow_negative_numbers = true)]
    im_coh0: Option<f64>,
    /// Output file (directory for sweep); stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Key–value settings file, or a CSV written by this tool; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also compare against the exponential closed forms and report the deviation on stderr
    #[arg(long, global = true)]
    oracle: bool,
}

impl Global {
    fn flag_settings(&self) -> Settings {
        Settings {
            gamma: self.gamma,
            kappa: self.kappa,
            delta0: self.delta0,
            profile: self.profile.clone(),
            t_max: self.t_max,
            points: self.points,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            pe0: self.pe0,
            re_coh0: self.re_coh0,
            im_coh0: self.im_coh0,
        }
    }

    fn settings(&self) -> Result<Settings, CliError> {
        let base = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Ok(base.overlay(&self.flag_settings()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Trajectory,
    Coefficients,
    Rates,
    Witness,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the emitter state from the initial condition
    Simulate {
        /// Extra outputs written next to --out
        #[arg(long, value_enum, value_delimiter = ',')]
        with: Vec<Output>,
    },
    /// Map coefficients A, B, C and their derivatives
    Coefficients,
    /// Generator rates γ₊, γ₋, γ_z and frequency ω
    Rates {
        #[arg(long, default_value_t = photonq::DEFAULT_EPS_SING)]
        eps_sing: f64,
    },
    /// Divisibility and non-Markovianity verdicts as JSON
    Witness {
        #[arg(long, default_value_t = photonq::DEFAULT_EPS_SING)]
        eps_sing: f64,
        /// Slack on rate inequalities
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run a grid of scenarios; one file per point plus index.json
    Sweep {
        /// KEY=START:STOP:COUNT, given once or twice; KEY may also be alpha
        #[arg(long, required = true)]
        vary: Vec<String>,
        #[arg(long, value_enum, default_value = "rates")]
        what: Output,
    },
    /// Data for one of the named figure datasets
    Figure { name: String },
    /// Samples of the pulse maximizing P_e at the horizon, as t,re,im
    OptimalPulse {
        #[arg(long)]
        horizon: f64,
    },
    /// Self-checks against closed forms and analytic bounds
    Validate {
        #[arg(default_value = "quick")]
        level: String,
    },
}

/// Opens `--out` or stdout.
pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::Validate { level } => {
            let level = level
                .parse()
                .map_err(|e: String| CliError::config("level", e))?;
            commands::validate(level, out)
        }
        Command::Figure { name } => figures::run(name, &g.settings()?, out),
        Command::Sweep { vary, what } => {
            let dir = out.ok_or_else(|| CliError::config("out", "sweep needs --out DIR"))?;
            sweep::run(&g.settings()?, vary, *what, dir)
        }
        cmd => {
            let scenario = g.settings()?.resolve()?;
            match cmd {
                Command::Simulate { with } => commands::simulate(&scenario, with, out, g.oracle),
                Command::Coefficients => commands::coefficients(&scenario, out, g.oracle),
                Command::Rates { eps_sing } => commands::rates(&scenario, *eps_sing, out, g.oracle),
                Command::Witness { eps_sing, tol } => {
                    commands::witness(&scenario, *eps_sing, *tol, out)
                }
                Command::OptimalPulse { horizon } => {
                    commands::optimal_pulse(&scenario, *horizon, out)
                }
                _ => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Validation) {
                eprintln!("photonq: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
