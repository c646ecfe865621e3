//! The feasibility solver: regularized Gauss-Newton DDP with an Armijo line
//! search on the least-squares violation objective.

mod regularization;
mod rollout;
mod settings;

pub use regularization::{update_regularization, RegState, StepOutcome};
pub use rollout::{
    control_gradient, gradient_from_qp, make_dynamically_feasible, nonlinear_rollout,
    open_loop_rollout, ControlGradient,
};
pub use settings::{SolverSettings, MU_MAX};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocp::{
    build_feasibility_problem, dynamics_defect, FeasibilityOcp, OcpModel, Trajectory,
};
use crate::riccati::{backward_sweep, linear_rollout, qp_optimal_objective, BackwardPass, QpStep};

/// Iterates are treated as dynamically feasible at or below this defect.
pub const FEASIBLE_DEFECT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Feasible,
    Stationary,
    MaxIter,
    RegFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Feasible => "Feasible",
            SolveStatus::Stationary => "Stationary",
            SolveStatus::MaxIter => "MaxIter",
            SolveStatus::RegFailure => "RegFailure",
        };
        f.write_str(s)
    }
}

impl FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Feasible" => Ok(SolveStatus::Feasible),
            "Stationary" => Ok(SolveStatus::Stationary),
            "MaxIter" => Ok(SolveStatus::MaxIter),
            "RegFailure" => Ok(SolveStatus::RegFailure),
            other => Err(Error::InvalidParameter(format!("unknown status `{other}`"))),
        }
    }
}

/// One line of the iterate log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iteration: usize,
    /// `f` at the iterate.
    pub objective: f64,
    /// Quantity the line search decreases: `f`, or the `ℓ1` merit for
    /// multiple shooting.
    pub merit: f64,
    /// `‖∇F‖∞`, or the composite residual for multiple shooting.
    pub kkt: f64,
    pub defect: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Predicted reduction of the QP model, zero on the final record.
    pub predicted_reduction: f64,
    /// Accepted step size, zero when no step was taken.
    pub step_size: f64,
    pub accepted: bool,
    /// The backward sweep succeeded, so a QP step and its predicted
    /// reduction exist for this iterate.
    pub factorized: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub trajectory: Trajectory,
    pub status: SolveStatus,
    pub log: Vec<IterateRecord>,
    /// Number of iterations that solved a QP.
    pub iterations: usize,
    /// Number of Hessian (QP) setups followed by a Riccati sweep.
    pub hessian_evals: usize,
    pub objective: f64,
    pub kkt: f64,
    pub defect: f64,
}

impl SolveResult {
    pub fn accepted_steps(&self) -> impl Iterator<Item = &IterateRecord> {
        self.log.iter().filter(|r| r.accepted)
    }
}

/// Result of a successful line search.
#[derive(Debug, Clone)]
pub struct Accepted {
    pub alpha: f64,
    pub trajectory: Trajectory,
    pub objective: f64,
}

/// Backtracking by halving from `α = 1` until
/// `f_base − f(trial) ≥ η α m_f`. Trials that fail to evaluate count as
/// rejected. Returns `None` when `α` drops below the minimum step.
pub fn backtrack<T>(
    f_base: f64,
    predicted: f64,
    settings: &SolverSettings,
    mut trial: T,
) -> Result<Option<Accepted>>
where
    T: FnMut(f64) -> Result<(Trajectory, f64)>,
{
    let mut alpha = 1.0;
    while alpha >= settings.min_step {
        match trial(alpha) {
            Ok((trajectory, objective)) => {
                if objective.is_finite()
                    && f_base - objective >= settings.armijo * alpha * predicted
                {
                    return Ok(Some(Accepted {
                        alpha,
                        trajectory,
                        objective,
                    }));
                }
            }
            Err(Error::RolloutDiverged { .. })
            | Err(Error::NonFinite { .. })
            | Err(Error::Integration(_)) => {}
            Err(e) => return Err(e),
        }
        alpha *= 0.5;
    }
    Ok(None)
}

/// Armijo search along the DDP rollout.
pub fn armijo_search(
    focp: &FeasibilityOcp<'_>,
    base: &Trajectory,
    bp: &BackwardPass,
    f_base: f64,
    predicted: f64,
    settings: &SolverSettings,
) -> Result<Option<Accepted>> {
    backtrack(f_base, predicted, settings, |alpha| {
        let t = nonlinear_rollout(focp.model(), bp, base, alpha)?;
        let f = focp.objective(&t)?;
        Ok((t, f))
    })
}

/// Forward pass variant shared by the feasible-iterate solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ForwardPass {
    /// Feedback on simulated states (DDP).
    Feedback,
    /// Control update without feedback (single shooting).
    OpenLoop,
}

/// Finds a dynamically feasible trajectory that zeroes the constraint
/// violation, or a stationary point of the violation.
pub fn solve(
    model: &dyn OcpModel,
    guess: &Trajectory,
    settings: &SolverSettings,
) -> Result<SolveResult> {
    solve_feasible_iterates(model, guess, settings, ForwardPass::Feedback)
}

pub(crate) fn solve_feasible_iterates(
    model: &dyn OcpModel,
    guess: &Trajectory,
    settings: &SolverSettings,
    pass: ForwardPass,
) -> Result<SolveResult> {
    settings.validate()?;
    let focp = build_feasibility_problem(model)?;
    guess.check_dims(model)?;

    let mut hessian_evals = 0;
    let mut traj = if dynamics_defect(model, guess)? <= FEASIBLE_DEFECT {
        guess.clone()
    } else {
        let (t, sweeps) = rollout::make_dynamically_feasible_counted(&focp, guess, settings)?;
        hessian_evals += sweeps;
        t
    };

    let mut f = focp.objective(&traj)?;
    let mut reg = RegState::new(settings, f);
    let mut log = Vec::new();
    let mut restarts = 0;
    let mut k = 0;

    let status = loop {
        reg.gamma = reg.mu * f;
        let qp = focp.stage_data(&traj, reg.gamma)?;
        let kkt = gradient_from_qp(&qp).inf_norm();
        let defect = dynamics_defect(model, &traj)?;
        let mut record = IterateRecord {
            iteration: k,
            objective: f,
            merit: f,
            kkt,
            defect,
            mu: reg.mu,
            gamma: reg.gamma,
            predicted_reduction: 0.0,
            step_size: 0.0,
            accepted: false,
            factorized: false,
        };

        if f <= settings.feasibility_tol {
            log.push(record);
            break SolveStatus::Feasible;
        }
        if kkt <= settings.stationarity_tol {
            log.push(record);
            break SolveStatus::Stationary;
        }
        if k >= settings.max_iter {
            log.push(record);
            break SolveStatus::MaxIter;
        }

        hessian_evals += 1;
        let bp = match backward_sweep(&qp) {
            Ok(bp) => bp,
            Err(Error::NotPositiveDefinite { .. }) => {
                log.push(record);
                k += 1;
                restarts += 1;
                match escalate(reg, f, settings, restarts) {
                    Some(next) => {
                        reg = next;
                        continue;
                    }
                    None => break SolveStatus::RegFailure,
                }
            }
            Err(e) => return Err(e),
        };
        let predicted = -qp_optimal_objective(&bp);
        record.predicted_reduction = predicted;
        record.factorized = true;
        if !(predicted > 0.0) {
            log.push(record);
            break SolveStatus::Stationary;
        }

        let accepted = match pass {
            ForwardPass::Feedback => armijo_search(&focp, &traj, &bp, f, predicted, settings)?,
            ForwardPass::OpenLoop => {
                let (step, _) = linear_rollout(&bp, &qp, &traj, 1.0);
                open_loop_search(&focp, &traj, &step, f, predicted, settings)?
            }
        };

        k += 1;
        match accepted {
            Some(acc) => {
                record.step_size = acc.alpha;
                record.accepted = true;
                log.push(record);
                let outcome = if acc.alpha == 1.0 {
                    StepOutcome::FullStep
                } else {
                    StepOutcome::ReducedStep
                };
                traj = acc.trajectory;
                f = acc.objective;
                restarts = 0;
                match update_regularization(reg, outcome, f, settings) {
                    Ok(next) => reg = next,
                    Err(_) => break SolveStatus::RegFailure,
                }
            }
            None => {
                log.push(record);
                restarts += 1;
                match escalate(reg, f, settings, restarts) {
                    Some(next) => reg = next,
                    None => break SolveStatus::RegFailure,
                }
            }
        }
    };

    let last = log.last().expect("log has a final record");
    Ok(SolveResult {
        objective: last.objective,
        kkt: last.kkt,
        defect: last.defect,
        trajectory: traj,
        status,
        iterations: k,
        hessian_evals,
        log,
    })
}

pub(crate) fn escalate(
    reg: RegState,
    f: f64,
    settings: &SolverSettings,
    restarts: usize,
) -> Option<RegState> {
    if restarts > settings.max_reg_restarts {
        return None;
    }
    update_regularization(reg, StepOutcome::Failure, f, settings).ok()
}

fn open_loop_search(
    focp: &FeasibilityOcp<'_>,
    base: &Trajectory,
    step: &QpStep,
    f_base: f64,
    predicted: f64,
    settings: &SolverSettings,
) -> Result<Option<Accepted>> {
    backtrack(f_base, predicted, settings, |alpha| {
        let t = open_loop_rollout(focp.model(), step, base, alpha)?;
        let f = focp.objective(&t)?;
        Ok((t, f))
    })
}
