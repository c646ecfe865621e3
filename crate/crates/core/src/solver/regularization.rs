//! Adaptive Levenberg-Marquardt parameter: `γ = μ·f`, so the Hessian
//! shift vanishes as the iterates approach feasibility.

use super::settings::{SolverSettings, MU_MAX};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegState {
    pub mu: f64,
    /// Value of `μ` at the last full step, initialized with `μ₀`.
    pub mu_bar: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// A step with `α = 1` was accepted.
    FullStep,
    /// A step with `α < 1` was accepted.
    ReducedStep,
    /// The line search fell below the minimum step or the Riccati sweep failed.
    Failure,
}

impl RegState {
    pub fn new(settings: &SolverSettings, objective: f64) -> Self {
        Self {
            mu: settings.mu_init,
            mu_bar: settings.mu_init,
            gamma: settings.mu_init * objective,
        }
    }
}

/// Advances the regularization after an iteration.
///
/// `objective` is the value at the iterate the next QP is built at: the new
/// iterate after an accepted step, the unchanged one after a failure.
pub fn update_regularization(
    reg: RegState,
    outcome: StepOutcome,
    objective: f64,
    settings: &SolverSettings,
) -> Result<RegState> {
    let (mu, mu_bar) = match outcome {
        StepOutcome::FullStep => (settings.mu_min.max(reg.mu_bar / settings.mu_factor), reg.mu),
        StepOutcome::ReducedStep | StepOutcome::Failure => {
            (settings.mu_factor * reg.mu, reg.mu_bar)
        }
    };
    if !(mu <= MU_MAX) {
        return Err(Error::RegularizationOverflow { mu });
    }
    Ok(RegState {
        mu,
        mu_bar,
        gamma: mu * objective,
    })
}
