//! Command-line front end: `simulate`, `certify`, `transform`, `kernels`
//! and `convergence`.
//!
//! Exit codes: 0 on success, 1 on a usage or configuration error, 2 when a
//! run halts at the `‖q‖_∞` ceiling.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shortpulse::evolution::{PicardConfig, Stepper};

use commands::Status;
use config::{ConvergenceConfig, InitialData, RunConfig};

/// Overrides the output directory of every command.
pub const OUT_DIR_ENV: &str = "SHORTPULSE_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] shortpulse::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("constraint halt: {0}")]
    Halt(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Halt(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "shortpulse", version, about = "Short-pulse / sine-Gordon simulation and certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve initial data and write trajectory.csv and summary.json.
    Simulate(RunArgs),
    /// Write the global existence certificate of the initial data.
    Certify(RunArgs),
    /// Map a state to x-coordinates: fields.csv and equivalence.json.
    Transform(RunArgs),
    /// Tabulate kernel bounds to kernels.csv.
    Kernels {
        /// Comma-separated times.
        #[arg(long = "t", value_delimiter = ',', default_values_t = vec![0.1, 1.0, 2.0, 10.0])]
        times: Vec<f64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a refinement ladder and fit the observed order.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, requires = "ladder")]
        kind: Option<LadderKind>,
        /// Comma-separated time steps or grid sizes.
        #[arg(long, value_delimiter = ',', requires = "kind")]
        ladder: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LadderKind {
    Dt,
    N,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StepperKind {
    Mol,
    Picard,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Initial state as a `y,value` CSV (replaces the configured data).
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub q_c_bound: Option<f64>,
    #[arg(long, value_enum)]
    pub stepper: Option<StepperKind>,
    /// Cap the time step by the local existence rule.
    #[arg(long)]
    pub step_rule: bool,
}

impl RunArgs {
    /// Config file (or defaults), then the environment, then flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        if let Some(dir) = &self.out_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(path) = &self.state {
            cfg.initial_data = InitialData::FromFile { path: path.clone() };
        }
        if let Some(a) = self.amplitude {
            cfg.initial_data.set_amplitude(a)?;
        }
        if let Some(v) = self.half_width {
            cfg.grid.half_width = v;
        }
        if let Some(v) = self.n_points {
            cfg.grid.n_points = v;
        }
        if let Some(v) = self.t_final {
            cfg.t_final = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.record_every {
            cfg.record_every = v;
        }
        if let Some(v) = self.q_c_bound {
            cfg.q_c_bound = v;
        }
        match self.stepper {
            Some(StepperKind::Mol) => cfg.stepper = Stepper::Mol,
            Some(StepperKind::Picard) if !matches!(cfg.stepper, Stepper::Picard(_)) => {
                cfg.stepper = Stepper::Picard(PicardConfig::default())
            }
            _ => {}
        }
        if self.step_rule {
            cfg.use_step_rule = true;
        }
        Ok(cfg)
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

pub fn execute(command: &Command) -> Result<Status, CliError> {
    match command {
        Command::Simulate(args) => commands::simulate(&args.resolve()?),
        Command::Certify(args) => commands::certify(&args.resolve()?),
        Command::Transform(args) => commands::transform(&args.resolve()?),
        Command::Kernels { times, out_dir: dir } => commands::kernels(times, &out_dir(dir)),
        Command::Convergence { run, kind, ladder } => {
            let mut cfg = run.resolve()?;
            if let (Some(kind), Some(ladder)) = (kind, ladder) {
                cfg.convergence = Some(match kind {
                    LadderKind::Dt => ConvergenceConfig::Dt { ladder: ladder.clone() },
                    LadderKind::N => {
                        let t = match &cfg.convergence {
                            Some(ConvergenceConfig::N { t, .. }) => *t,
                            _ => 1.0,
                        };
                        if ladder.iter().any(|&n| !(n >= 1.0 && n.fract() == 0.0)) {
                            return Err(CliError::Config("grid sizes must be positive integers".into()));
                        }
                        ConvergenceConfig::N {
                            ladder: ladder.iter().map(|&n| n as usize).collect(),
                            t,
                        }
                    }
                });
            }
            commands::convergence(&cfg)
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(Status::Ok) => 0,
        Ok(Status::Halted) => {
            eprintln!("run halted at the |q| ceiling");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
