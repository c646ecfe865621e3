use nalgebra::DVector;

use super::settings::SolverSettings;
use crate::error::{Block, Error, Result};
use crate::linalg::all_finite;
use crate::ocp::{FeasibilityOcp, OcpModel, Trajectory};
use crate::riccati::{backward_sweep, BackwardPass, QpData, QpStep};

/// DDP forward pass: feedback on the simulated states and the nonlinear
/// dynamics, so the result is dynamically feasible by construction.
pub fn nonlinear_rollout(
    model: &dyn OcpModel,
    bp: &BackwardPass,
    base: &Trajectory,
    alpha: f64,
) -> Result<Trajectory> {
    let init = &base.init + &bp.init.feedforward * alpha;
    if !all_finite(&init) {
        return Err(Error::RolloutDiverged {
            block: Block::Initial,
        });
    }
    let n = base.horizon();
    let mut states = Vec::with_capacity(n + 1);
    let mut controls = Vec::with_capacity(n);
    states.push(init.clone());
    for (k, gains) in bp.stages.iter().enumerate() {
        let u = &base.controls[k]
            + &gains.feedforward * alpha
            + &gains.feedback * (&states[k] - &base.states[k]);
        let next = match model.dynamics(k, &states[k], &u) {
            Ok(x) if all_finite(&x) && all_finite(&u) => x,
            Ok(_) | Err(Error::Integration(_)) | Err(Error::NonFinite { .. }) => {
                return Err(Error::RolloutDiverged {
                    block: Block::Stage(k),
                })
            }
            Err(e) => return Err(e),
        };
        controls.push(u);
        states.push(next);
    }
    Ok(Trajectory {
        init,
        states,
        controls,
    })
}

/// Open-loop forward pass: controls move along `alpha · step.controls`
/// without state feedback, states follow the nonlinear dynamics.
pub fn open_loop_rollout(
    model: &dyn OcpModel,
    step: &QpStep,
    base: &Trajectory,
    alpha: f64,
) -> Result<Trajectory> {
    let init = &base.init + &step.init * alpha;
    let controls: Vec<DVector<f64>> = base
        .controls
        .iter()
        .zip(&step.controls)
        .map(|(u, d)| u + d * alpha)
        .collect();
    if !all_finite(&init) || controls.iter().any(|u| !all_finite(u)) {
        return Err(Error::RolloutDiverged {
            block: Block::Initial,
        });
    }
    match Trajectory::simulate(model, init, controls) {
        Ok(t) => Ok(t),
        Err(Error::Integration(_)) | Err(Error::NonFinite { .. }) => Err(Error::RolloutDiverged {
            block: Block::Terminal,
        }),
        Err(e) => Err(e),
    }
}

/// Gradient of the reduced objective `F(u)` with respect to
/// `(u_init, u_0, .., u_{N-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGradient {
    pub init: DVector<f64>,
    pub controls: Vec<DVector<f64>>,
}

impl ControlGradient {
    pub fn inf_norm(&self) -> f64 {
        self.controls
            .iter()
            .fold(self.init.amax(), |m, g| m.max(g.amax()))
    }
}

/// Adjoint sweep over an existing linearization. On a dynamically
/// infeasible point this is the Lagrangian gradient with the multipliers
/// that zero the state gradient.
pub fn gradient_from_qp(qp: &QpData) -> ControlGradient {
    let mut costate = qp.vx.clone();
    let mut controls = vec![DVector::zeros(0); qp.horizon()];
    for (k, s) in qp.stages.iter().enumerate().rev() {
        controls[k] = &s.lu + s.fu.transpose() * &costate;
        costate = &s.lx + s.fx.transpose() * &costate;
    }
    ControlGradient {
        init: costate,
        controls,
    }
}

pub fn control_gradient(focp: &FeasibilityOcp<'_>, traj: &Trajectory) -> Result<ControlGradient> {
    Ok(gradient_from_qp(&focp.stage_data(traj, 0.0)?))
}

/// Turns an arbitrary guess into a dynamically feasible trajectory by one
/// Riccati sweep at the guess (dynamics offsets included) followed by a full
/// nonlinear rollout.
///
/// The sweep uses `γ = μ·f(guess)` starting from `μ₀`; when the guess has
/// zero objective `γ = μ` is used instead so the shift stays positive.
pub fn make_dynamically_feasible(
    focp: &FeasibilityOcp<'_>,
    guess: &Trajectory,
    settings: &SolverSettings,
) -> Result<Trajectory> {
    let (traj, _) = make_dynamically_feasible_counted(focp, guess, settings)?;
    Ok(traj)
}

pub(crate) fn make_dynamically_feasible_counted(
    focp: &FeasibilityOcp<'_>,
    guess: &Trajectory,
    settings: &SolverSettings,
) -> Result<(Trajectory, usize)> {
    let f = focp.objective(guess)?;
    let scale = if f > 0.0 { f } else { 1.0 };
    let mut mu = settings.mu_init;
    let mut sweeps = 0;
    for _ in 0..=settings.max_reg_restarts {
        let qp = focp.stage_data(guess, mu * scale)?;
        sweeps += 1;
        match backward_sweep(&qp) {
            Ok(bp) => return Ok((nonlinear_rollout(focp.model(), &bp, guess, 1.0)?, sweeps)),
            Err(Error::NotPositiveDefinite { .. }) => mu *= settings.mu_factor,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotPositiveDefinite {
        block: Block::Initial,
    })
}
