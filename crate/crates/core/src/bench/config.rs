use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::solver::SolverSettings;

/// TOML configuration. Every key is optional; command-line flags take
/// precedence over the file.
///
/// ```toml
/// [problem]
/// name = "cart_pendulum"
/// obstacle = 2.5
///
/// [solver]
/// name = "dms"
/// sigma = 0.1
/// max_iter = 200
///
/// [sweep]
/// solvers = ["fpddp", "dss", "dms:0.1"]
/// lo = 0.7
/// hi = 4.3
/// n = 100
/// jobs = 4
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: Option<String>,
    pub obstacle: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub name: Option<String>,
    pub sigma: Option<f64>,
    pub armijo: Option<f64>,
    pub min_step: Option<f64>,
    pub feasibility_tol: Option<f64>,
    pub stationarity_tol: Option<f64>,
    pub mu_min: Option<f64>,
    pub mu_init: Option<f64>,
    pub mu_factor: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_reg_restarts: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub solvers: Option<Vec<String>>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: Option<usize>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Defaults overridden by the `[solver]` section.
    pub fn settings(&self) -> Result<SolverSettings> {
        let s = &self.solver;
        let d = SolverSettings::default();
        let settings = SolverSettings {
            armijo: s.armijo.unwrap_or(d.armijo),
            min_step: s.min_step.unwrap_or(d.min_step),
            feasibility_tol: s.feasibility_tol.unwrap_or(d.feasibility_tol),
            stationarity_tol: s.stationarity_tol.unwrap_or(d.stationarity_tol),
            mu_min: s.mu_min.unwrap_or(d.mu_min),
            mu_init: s.mu_init.unwrap_or(d.mu_init),
            mu_factor: s.mu_factor.unwrap_or(d.mu_factor),
            max_iter: s.max_iter.unwrap_or(d.max_iter),
            max_reg_restarts: s.max_reg_restarts.unwrap_or(d.max_reg_restarts),
        };
        settings.validate()?;
        Ok(settings)
    }
}
