//! Run configuration: TOML sections for the problem family, discretization,
//! solver tolerances, continuation targets and output paths.

use serde::{Deserialize, Serialize};

use crate::continuation::StepControl;
use crate::error::{Error, Result};
use crate::field::VectorFieldSpec;
use crate::floquet::FloquetSettings;
use crate::fourier::PeriodicMap;
use crate::section::SectionProblem;
use crate::solve::{Damping, NewtonSettings};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ForcingMode {
    pub component: usize,
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProblemConfig {
    /// One of `linear_affine`, `logistic`, `forced_rotation`, `limit_cycle`.
    pub family: String,
    #[serde(default)]
    pub dim: Option<usize>,
    /// Row-major `n x n` matrix for the linear families.
    #[serde(default)]
    pub matrix: Option<Vec<f64>>,
    /// Fourier modes of the forcing for `linear_affine`.
    #[serde(default)]
    pub forcing: Vec<ForcingMode>,
    /// Logistic growth rate.
    #[serde(default)]
    pub a: Option<f64>,
    /// Logistic forcing amplitude.
    #[serde(default)]
    pub c: Option<f64>,
    /// Forcing amplitude for `forced_rotation`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub hamiltonian: Option<bool>,
}

fn default_k_max() -> usize {
    32
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DiscretizationConfig {
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self { k_max: default_k_max() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub tol_residual: f64,
    pub tol_step: f64,
    /// `none` or `armijo_halving`.
    pub damping: String,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { max_iter: 25, tol_residual: 1e-11, tol_step: 1e-12, damping: "none".into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct FloquetConfig {
    pub steps: usize,
    pub tol_nondeg: f64,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self { steps: 2048, tol_nondeg: 1e-4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ContinuationConfig {
    pub tau_target_pos: f64,
    pub tau_target_neg: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub growth: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            tau_target_pos: 0.3,
            tau_target_neg: -0.3,
            initial_step: 0.02,
            min_step: 1e-5,
            max_step: 0.05,
            growth: 1.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct VerifyConfig {
    pub steps_per_unit: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { steps_per_unit: 2048 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SeedConfig {
    /// Initial point for shooting.
    pub guess: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RngConfig {
    pub seed: u64,
}

impl Default for RngConfig {
    fn default() -> Self {
        Self { seed: 42 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub floquet: FloquetConfig,
    #[serde(default)]
    pub continuation: ContinuationConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub seed: SeedConfig,
    #[serde(default)]
    pub rng: RngConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let recognized = ["linear_affine", "logistic", "forced_rotation", "limit_cycle"];
        if !recognized.contains(&self.problem.family.as_str()) {
            return Err(Error::Config(format!(
                "unrecognized family `{}`",
                self.problem.family
            )));
        }
        if self.newton.tol_residual <= 0.0
            || self.newton.tol_step <= 0.0
            || self.floquet.tol_nondeg <= 0.0
        {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !["none", "armijo_halving"].contains(&self.newton.damping.as_str()) {
            return Err(Error::Config(format!(
                "unrecognized damping `{}`",
                self.newton.damping
            )));
        }
        if self.discretization.k_max < 4 {
            return Err(Error::Config("k_max must be at least 4".into()));
        }
        Ok(())
    }

    pub fn build_field(&self) -> Result<VectorFieldSpec> {
        build_field(&self.problem, self.discretization.k_max)
    }

    pub fn build_problem(&self) -> Result<SectionProblem> {
        Ok(SectionProblem::plain(self.build_field()?, self.discretization.k_max))
    }

    pub fn newton_settings(&self) -> NewtonSettings {
        NewtonSettings {
            max_iter: self.newton.max_iter,
            tol_residual: self.newton.tol_residual,
            tol_step: self.newton.tol_step,
            damping: if self.newton.damping == "armijo_halving" {
                Damping::ArmijoHalving
            } else {
                Damping::None
            },
        }
    }

    pub fn floquet_settings(&self) -> FloquetSettings {
        FloquetSettings {
            steps: self.floquet.steps,
            tol_nondeg: self.floquet.tol_nondeg,
            hamiltonian: self.problem.hamiltonian.unwrap_or(false),
        }
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            initial: self.continuation.initial_step,
            min_step: self.continuation.min_step,
            max_step: self.continuation.max_step,
            growth: self.continuation.growth,
        }
    }

    pub fn seed_guess(&self, dim: usize) -> Vec<f64> {
        if self.seed.guess.len() == dim {
            self.seed.guess.clone()
        } else {
            vec![0.0; dim]
        }
    }
}

/// Materialize the vector field described by a problem record.
pub fn build_field(p: &ProblemConfig, k_max: usize) -> Result<VectorFieldSpec> {
    match p.family.as_str() {
        "linear_affine" => {
            let dim = p.dim.ok_or_else(|| Error::Config("linear_affine needs dim".into()))?;
            let raw = p
                .matrix
                .as_ref()
                .ok_or_else(|| Error::Config("linear_affine needs matrix".into()))?;
            if raw.len() != dim * dim {
                return Err(Error::Config("matrix must be dim x dim, row-major".into()));
            }
            let matrix = DMatrix::from_row_slice(dim, dim, raw);
            let mut forcing = PeriodicMap::zero(dim, k_max);
            for mode in &p.forcing {
                if mode.component >= dim || mode.k.unsigned_abs() as usize > k_max {
                    return Err(Error::Config("forcing mode out of range".into()));
                }
                forcing.set_mode(mode.component, mode.k, Complex64::new(mode.re, mode.im));
            }
            Ok(VectorFieldSpec::linear_affine(matrix, forcing))
        }
        "logistic" => Ok(VectorFieldSpec::logistic(
            p.a.ok_or_else(|| Error::Config("logistic needs a".into()))?,
            p.c.unwrap_or(0.0),
        )),
        "forced_rotation" => {
            let raw = p
                .matrix
                .as_ref()
                .ok_or_else(|| Error::Config("forced_rotation needs matrix".into()))?;
            if raw.len() != 4 {
                return Err(Error::Config("forced_rotation matrix must be 2 x 2".into()));
            }
            Ok(VectorFieldSpec::forced_rotation(
                DMatrix::from_row_slice(2, 2, raw),
                p.epsilon.unwrap_or(0.0),
            ))
        }
        "limit_cycle" => Ok(VectorFieldSpec::limit_cycle()),
        other => Err(Error::Config(format!("unrecognized family `{other}`"))),
    }
}
