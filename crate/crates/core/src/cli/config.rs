//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::lattice::VerifyConfig;
use crate::potential::{
    AffineMap, Family, Potential, PotentialError, DEFAULT_SAMPLES, DEFAULT_TOLERANCE,
};
use crate::solver::SolverConfig;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Family,
    /// Optional affine change of variables applied to the family.
    #[serde(default)]
    pub transform: Option<AffineMap>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub states: Option<StatesSection>,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub verify: bool,
    #[serde(default)]
    pub lattice: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub half_width: f64,
    pub cells: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        GridSection {
            half_width: d.half_width,
            cells: d.cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub lambda0: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub stagnation_window: usize,
    pub gamma: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            lambda0: d.lambda0,
            grad_tol: d.grad_tol,
            max_iters: d.max_iters,
            stagnation_window: d.stagnation_window,
            gamma: d.gamma,
        }
    }
}

/// Physical asymptotic states; when absent the potential is taken as normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesSection {
    pub r_minus: f64,
    pub r_plus: f64,
    /// Defaults to the value with zero mean velocity.
    #[serde(default)]
    pub v_minus: Option<f64>,
    #[serde(default = "default_sign")]
    pub sigma_sign: i32,
    #[serde(default = "default_kinetic_tol")]
    pub kinetic_tolerance: f64,
}

fn default_sign() -> i32 {
    1
}

fn default_kinetic_tol() -> f64 {
    crate::macroscopic::KINETIC_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    /// Defaults to 3Γ (at least 2).
    pub scan_halfwidth: Option<f64>,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            scan_halfwidth: None,
            samples: DEFAULT_SAMPLES,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub workers: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            betas: Vec::new(),
            workers: 4,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn potential(&self) -> Result<Potential, PotentialError> {
        let base = Potential::from_family(&self.potential)?;
        Ok(match self.transform {
            Some(map) => Potential::affine(base, map),
            None => base,
        })
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            lambda0: self.solver.lambda0,
            max_iters: self.solver.max_iters,
            grad_tol: self.solver.grad_tol,
            stagnation_window: self.solver.stagnation_window,
            gamma: self.solver.gamma,
            half_width: self.grid.half_width,
            cells: self.grid.cells,
        }
    }

    /// Copy with the family's β replaced.
    pub fn with_beta(&self, beta: f64) -> Result<Self, CliError> {
        let potential = match &self.potential {
            Family::Quartic { .. } => Family::Quartic { beta },
            Family::GraphViolating { c, .. } => Family::GraphViolating { beta, c: *c },
            Family::Tilted { epsilon, .. } => Family::Tilted {
                beta,
                epsilon: *epsilon,
            },
            other => {
                return Err(CliError::Config(format!(
                    "family {other:?} has no beta parameter to sweep"
                )))
            }
        };
        Ok(RunConfig {
            potential,
            ..self.clone()
        })
    }
}
