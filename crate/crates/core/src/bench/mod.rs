//! Batch runs, result files and performance profiles.

mod config;
mod profile;
mod record;
mod sweep;

pub use config::{FileConfig, ProblemSection, SolverSection, SweepSection};
pub use profile::{performance_profile, write_profile, Metric, Profile};
pub use record::{
    read_records, write_iterate_log, write_records, RunRecord, RunStatus, SUCCESS_DEFECT,
    SUCCESS_OBJECTIVE,
};
pub use sweep::{linspace, run_sweep, SweepConfig};

use std::fmt;
use std::time::Instant;

use crate::baselines::{solve_dms, solve_dss, DmsSettings};
use crate::error::{Error, Result};
use crate::ocp::{OcpModel, Trajectory};
use crate::problems::{instantiate, ProblemId, ProblemParams};
use crate::solver::{solve, SolveResult, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    FpDdp,
    Dss,
    Dms { sigma: f64 },
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::FpDdp => "fpddp",
            SolverKind::Dss => "dss",
            SolverKind::Dms { .. } => "dms",
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match self {
            SolverKind::Dms { sigma } => Some(*sigma),
            _ => None,
        }
    }

    /// `sigma` is required for `dms` and rejected otherwise.
    pub fn parse(name: &str, sigma: Option<f64>) -> Result<Self> {
        let kind = match (name, sigma) {
            ("fpddp", None) => SolverKind::FpDdp,
            ("dss", None) => SolverKind::Dss,
            ("dms", Some(sigma)) => SolverKind::Dms { sigma },
            ("dms", None) => {
                return Err(Error::InvalidParameter(
                    "dms needs a penalty weight (--sigma)".into(),
                ))
            }
            ("fpddp" | "dss", Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "{name} takes no penalty weight"
                )))
            }
            (other, _) => return Err(Error::UnknownSolver(other.to_string())),
        };
        if let SolverKind::Dms { sigma } = kind {
            DmsSettings::new(sigma).validate()?;
        }
        Ok(kind)
    }

    /// Parses `fpddp`, `dss`, `dms` or `dms:<sigma>`; a plain `dms` takes
    /// `default_sigma`.
    pub fn from_arg(arg: &str, default_sigma: Option<f64>) -> Result<Self> {
        match arg.split_once(':') {
            Some(("dms", sigma)) => {
                let sigma = sigma.parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad penalty weight in `{arg}`"))
                })?;
                Self::parse("dms", Some(sigma))
            }
            Some(_) => Err(Error::UnknownSolver(arg.to_string())),
            None if arg == "dms" => Self::parse(arg, default_sigma),
            None => Self::parse(arg, None),
        }
    }

    pub fn run(
        &self,
        model: &dyn OcpModel,
        guess: &Trajectory,
        settings: &SolverSettings,
    ) -> Result<SolveResult> {
        match *self {
            SolverKind::FpDdp => solve(model, guess, settings),
            SolverKind::Dss => solve_dss(model, guess, settings),
            SolverKind::Dms { sigma } => solve_dms(
                model,
                guess,
                &DmsSettings {
                    sigma,
                    solver: settings.clone(),
                },
            ),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverKind::Dms { sigma } => write!(f, "dms(sigma={sigma})"),
            other => f.write_str(other.name()),
        }
    }
}

/// One solve of a registered problem.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub params: ProblemParams,
    pub solver: SolverKind,
    pub settings: SolverSettings,
}

/// Runs one solve. Solver errors after a valid setup become failure records;
/// `result` is `None` in that case.
pub fn run_single(config: &RunConfig) -> Result<(RunRecord, Option<SolveResult>)> {
    let instance = instantiate(config.problem, config.params)?;
    config.settings.validate()?;
    let start = Instant::now();
    let outcome = config
        .solver
        .run(instance.model.as_ref(), &instance.guess, &config.settings);
    let wall_time = start.elapsed().as_secs_f64();
    let obstacle = instance.params.obstacle;
    Ok(match outcome {
        Ok(result) => (
            RunRecord::from_result(config.problem, &config.solver, obstacle, wall_time, &result),
            Some(result),
        ),
        Err(e) => {
            log::warn!("{} on {} failed: {e}", config.solver, config.problem);
            (
                RunRecord::failure(config.problem, &config.solver, obstacle, wall_time),
                None,
            )
        }
    })
}
