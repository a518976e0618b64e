//! JSON run configuration.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use shortpulse::evolution::{Stepper, DEFAULT_Q_C_BOUND};
use shortpulse::grid::{self, Grid, GridFunction, Tolerances};
use shortpulse::initial;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 20.0,
            n_points: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    GaussianDerivative {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: f64,
    },
    SingleMode {
        amplitude: f64,
        mode: usize,
    },
    /// A `y,value` CSV; its grid replaces the configured one.
    FromFile { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::GaussianDerivative {
            amplitude: 0.1,
            width: 1.0,
            center: 0.0,
        }
    }
}

impl InitialData {
    pub fn amplitude(&self) -> Option<f64> {
        match self {
            InitialData::GaussianDerivative { amplitude, .. } | InitialData::SingleMode { amplitude, .. } => {
                Some(*amplitude)
            }
            InitialData::FromFile { .. } => None,
        }
    }

    pub fn set_amplitude(&mut self, a: f64) -> Result<(), CliError> {
        match self {
            InitialData::GaussianDerivative { amplitude, .. } | InitialData::SingleMode { amplitude, .. } => {
                *amplitude = a;
                Ok(())
            }
            InitialData::FromFile { .. } => Err(CliError::Config(
                "amplitude cannot be set for data read from a file".into(),
            )),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        !matches!(self, InitialData::FromFile { .. })
    }

    /// Samples the data on `grid` (ignored for `from_file`).
    pub fn build(&self, grid: Grid) -> Result<GridFunction, CliError> {
        Ok(match self {
            InitialData::GaussianDerivative {
                amplitude,
                width,
                center,
            } => initial::gaussian_derivative(grid, *amplitude, *width, *center),
            InitialData::SingleMode { amplitude, mode } => initial::single_mode(grid, *amplitude, *mode),
            InitialData::FromFile { path } => read_state(path)?,
        })
    }
}

pub fn read_state(path: &Path) -> Result<GridFunction, CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    grid::read_csv(BufReader::new(file)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvergenceConfig {
    /// Method-of-lines self-convergence over time steps, run to `t_final`.
    Dt { ladder: Vec<f64> },
    /// Kernel form against direct Fourier inversion over grid sizes.
    N {
        ladder: Vec<usize>,
        #[serde(default = "one")]
        t: f64,
    },
}

impl ConvergenceConfig {
    pub fn rungs(&self) -> usize {
        match self {
            ConvergenceConfig::Dt { ladder } => ladder.len(),
            ConvergenceConfig::N { ladder, .. } => ladder.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub initial_data: InitialData,
    pub stepper: Stepper,
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    /// Cap `dt` by the local existence step rule.
    pub use_step_rule: bool,
    pub q_c_bound: f64,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub sweep: Option<SweepConfig>,
    pub convergence: Option<ConvergenceConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            initial_data: InitialData::default(),
            stepper: Stepper::Mol,
            dt: 1e-3,
            t_final: 1.0,
            record_every: 10,
            use_step_rule: false,
            q_c_bound: DEFAULT_Q_C_BOUND,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("out"),
            sweep: None,
            convergence: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.half_width, self.grid.n_points).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn initial_q(&self) -> Result<GridFunction, CliError> {
        self.initial_data.build(self.grid()?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.tolerances.mass_rel > 0.0 && self.tolerances.decay_rel > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !(self.q_c_bound > 0.0 && self.q_c_bound < 1.0) {
            return bad(format!("q_c_bound must lie in (0, 1), got {}", self.q_c_bound));
        }
        if let Stepper::Picard(p) = &self.stepper {
            if !(p.tol > 0.0) || p.nodes < 2 || p.max_iter == 0 {
                return bad(format!("invalid Picard settings {p:?}"));
            }
        }
        self.grid()?;
        if self.initial_data.is_synthetic() {
            let peak = self.initial_q()?.max_abs();
            if !(peak < self.q_c_bound) {
                return bad(format!(
                    "initial sup norm {peak} is not below q_c_bound {}",
                    self.q_c_bound
                ));
            }
        }
        Ok(())
    }
}
