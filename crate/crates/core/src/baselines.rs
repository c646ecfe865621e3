//! Shooting baselines that share the QP direction and globalization of the
//! DDP solver: single shooting (open-loop control update, nonlinear states)
//! and multiple shooting (linearized states, `ℓ1` merit).

use crate::error::{Error, Result};
use crate::ocp::{
    build_feasibility_problem, dynamics_defects, FeasibilityOcp, OcpModel, Trajectory,
};
use crate::riccati::{backward_sweep, linear_rollout, qp_optimal_objective};
use crate::solver::{
    backtrack, escalate, gradient_from_qp, solve_feasible_iterates, update_regularization,
    ForwardPass, IterateRecord, RegState, SolveResult, SolveStatus, SolverSettings, StepOutcome,
};

/// Multiple shooting stops once `‖v(w)‖∞` is at or below this value and the
/// stationarity measure is small.
pub const DMS_DEFECT_TOL: f64 = 1e-8;

pub const DMS_PENALTIES: [f64; 3] = [1.0, 0.1, 0.01];

#[derive(Debug, Clone, PartialEq)]
pub struct DmsSettings {
    /// Weight of the `ℓ1` defect penalty in the merit function.
    pub sigma: f64,
    pub solver: SolverSettings,
}

impl DmsSettings {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            solver: SolverSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "penalty weight must be positive, got {}",
                self.sigma
            )));
        }
        self.solver.validate()
    }
}

impl Default for DmsSettings {
    fn default() -> Self {
        Self::new(0.1)
    }
}

/// Direct single shooting: the QP control step is applied without state
/// feedback and the states are simulated.
pub fn solve_dss(
    model: &dyn OcpModel,
    guess: &Trajectory,
    settings: &SolverSettings,
) -> Result<SolveResult> {
    solve_feasible_iterates(model, guess, settings, ForwardPass::OpenLoop)
}

struct Defects {
    l1: f64,
    squared: f64,
    max: f64,
}

fn defects(model: &dyn OcpModel, traj: &Trajectory) -> Result<Defects> {
    let all = dynamics_defects(model, traj)?;
    let mut d = Defects {
        l1: 0.0,
        squared: 0.0,
        max: 0.0,
    };
    for v in &all {
        d.l1 += v.lp_norm(1);
        d.squared += v.norm_squared();
        d.max = d.max.max(v.amax());
    }
    if !(d.l1.is_finite()) {
        return Err(Error::RolloutDiverged {
            block: crate::error::Block::Terminal,
        });
    }
    Ok(d)
}

fn merit(focp: &FeasibilityOcp<'_>, traj: &Trajectory, sigma: f64) -> Result<(f64, Defects)> {
    let f = focp.objective(traj)?;
    let d = defects(focp.model(), traj)?;
    Ok((f + sigma * d.l1, d))
}

/// Direct multiple shooting with a fixed-penalty `ℓ1` merit line search.
///
/// Iterates need not be dynamically feasible. The Hessian shift is
/// `γ = μ·(f + ½‖defects‖²)` so it vanishes only at a feasible point.
pub fn solve_dms(
    model: &dyn OcpModel,
    guess: &Trajectory,
    settings: &DmsSettings,
) -> Result<SolveResult> {
    settings.validate()?;
    let sigma = settings.sigma;
    let settings = &settings.solver;
    let focp = build_feasibility_problem(model)?;
    guess.check_dims(model)?;

    let mut traj = guess.clone();
    let mut f = focp.objective(&traj)?;
    let mut d = defects(model, &traj)?;
    let mut reg = RegState::new(settings, f + 0.5 * d.squared);
    let mut log = Vec::new();
    let mut hessian_evals = 0;
    let mut restarts = 0;
    let mut k = 0;

    let status = loop {
        let residual = f + 0.5 * d.squared;
        reg.gamma = reg.mu * residual;
        let qp = focp.stage_data(&traj, reg.gamma)?;
        let stationarity = gradient_from_qp(&qp).inf_norm();
        let phi = f + sigma * d.l1;
        let mut record = IterateRecord {
            iteration: k,
            objective: f,
            merit: phi,
            kkt: stationarity.max(d.max),
            defect: d.max,
            mu: reg.mu,
            gamma: reg.gamma,
            predicted_reduction: 0.0,
            step_size: 0.0,
            accepted: false,
            factorized: false,
        };

        if d.max <= DMS_DEFECT_TOL {
            if f <= settings.feasibility_tol {
                log.push(record);
                break SolveStatus::Feasible;
            }
            if stationarity <= settings.stationarity_tol {
                log.push(record);
                break SolveStatus::Stationary;
            }
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
                match escalate(reg, residual, settings, restarts) {
                    Some(next) => {
                        reg = next;
                        continue;
                    }
                    None => break SolveStatus::RegFailure,
                }
            }
            Err(e) => return Err(e),
        };
        let predicted = -qp_optimal_objective(&bp) + sigma * d.l1;
        record.predicted_reduction = predicted;
        record.factorized = true;
        if !(predicted > 0.0) {
            log.push(record);
            break SolveStatus::Stationary;
        }

        let (step, _) = linear_rollout(&bp, &qp, &traj, 1.0);
        let accepted = backtrack(phi, predicted, settings, |alpha| {
            let t = step.apply(&traj, alpha);
            let (m, _) = merit(&focp, &t, sigma)?;
            Ok((t, m))
        })?;

        k += 1;
        match accepted {
            Some(acc) => {
                record.step_size = acc.alpha;
                record.accepted = true;
                log.push(record);
                traj = acc.trajectory;
                f = focp.objective(&traj)?;
                d = defects(model, &traj)?;
                restarts = 0;
                let outcome = if acc.alpha == 1.0 {
                    StepOutcome::FullStep
                } else {
                    StepOutcome::ReducedStep
                };
                match update_regularization(reg, outcome, f + 0.5 * d.squared, settings) {
                    Ok(next) => reg = next,
                    Err(_) => break SolveStatus::RegFailure,
                }
            }
            None => {
                log.push(record);
                restarts += 1;
                match escalate(reg, residual, settings, restarts) {
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
