//! Riccati recursion for the equality-constrained OCP-QP that linearizes the
//! feasibility problem around an iterate.
//!
//! The QP is
//!
//! ```text
//! min  Σ_k [lx;lu]ᵀ[δx_k;δu_k] + ½[δx_k;δu_k]ᵀ[lxx luxᵀ; lux luu][δx_k;δu_k]
//!      + vxᵀδx_N + ½δx_NᵀVxxδx_N
//! s.t. δx_0 = δu_init + b_init,  δx_{k+1} = fx_k δx_k + fu_k δu_k + b_k
//! ```
//!
//! The auxiliary initial control has zero cost and identity input matrix, so
//! its Riccati block is the cost-to-go of the first state.

mod oracle;

pub use oracle::{dense_qp_oracle, DenseQpSolution, ORACLE_MAX_UNKNOWNS};

use nalgebra::{DMatrix, DVector};

use crate::error::{Block, Error, Result};
use crate::linalg::{symmetrize, Cholesky};
use crate::ocp::Trajectory;

/// Linearization of one stage.
#[derive(Debug, Clone)]
pub struct QpStage {
    pub fx: DMatrix<f64>,
    pub fu: DMatrix<f64>,
    /// Affine term of the linearized dynamics, `φ_k(x̄_k, ū_k) − x̄_{k+1}`.
    pub defect: DVector<f64>,
    pub lx: DVector<f64>,
    pub lu: DVector<f64>,
    pub lxx: DMatrix<f64>,
    /// Mixed block, `n_u × n_x`.
    pub lux: DMatrix<f64>,
    pub luu: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct QpData {
    /// `ū_init − x̄_0`.
    pub init_defect: DVector<f64>,
    pub stages: Vec<QpStage>,
    pub vx: DVector<f64>,
    pub vxx: DMatrix<f64>,
}

impl QpData {
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn state_dim(&self) -> usize {
        self.vx.len()
    }

    pub fn control_dim(&self) -> usize {
        self.stages.first().map_or(0, |s| s.lu.len())
    }

    /// Objective of the QP at a given step.
    pub fn objective(&self, step: &QpStep) -> f64 {
        let mut value = 0.0;
        for (k, s) in self.stages.iter().enumerate() {
            let (dx, du) = (&step.states[k], &step.controls[k]);
            value += s.lx.dot(dx) + s.lu.dot(du);
            value += 0.5 * dx.dot(&(&s.lxx * dx))
                + du.dot(&(&s.lux * dx))
                + 0.5 * du.dot(&(&s.luu * du));
        }
        let dx = &step.states[self.horizon()];
        value + self.vx.dot(dx) + 0.5 * dx.dot(&(&self.vxx * dx))
    }

    /// Largest residual of the linearized dynamics at a given step.
    pub fn dynamics_residual(&self, step: &QpStep) -> f64 {
        let mut r = (&step.states[0] - &step.init - &self.init_defect).amax();
        for (k, s) in self.stages.iter().enumerate() {
            let pred = &s.fx * &step.states[k] + &s.fu * &step.controls[k] + &s.defect;
            r = r.max((&step.states[k + 1] - pred).amax());
        }
        r
    }
}

/// A primal step `(δu_init, δx, δu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpStep {
    pub init: DVector<f64>,
    pub states: Vec<DVector<f64>>,
    pub controls: Vec<DVector<f64>>,
}

impl QpStep {
    pub fn max_abs_diff(&self, other: &QpStep) -> f64 {
        let mut m = (&self.init - &other.init).amax();
        for (a, b) in self.states.iter().zip(&other.states) {
            m = m.max((a - b).amax());
        }
        for (a, b) in self.controls.iter().zip(&other.controls) {
            m = m.max((a - b).amax());
        }
        m
    }

    pub fn inf_norm(&self) -> f64 {
        let mut m = self.init.amax();
        for v in self.states.iter().chain(&self.controls) {
            m = m.max(v.amax());
        }
        m
    }

    /// The step `traj − base`.
    pub fn between(base: &Trajectory, traj: &Trajectory) -> Self {
        Self {
            init: &traj.init - &base.init,
            states: traj
                .states
                .iter()
                .zip(&base.states)
                .map(|(a, b)| a - b)
                .collect(),
            controls: traj
                .controls
                .iter()
                .zip(&base.controls)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `base + alpha · self`.
    pub fn apply(&self, base: &Trajectory, alpha: f64) -> Trajectory {
        Trajectory {
            init: &base.init + &self.init * alpha,
            states: base
                .states
                .iter()
                .zip(&self.states)
                .map(|(x, d)| x + d * alpha)
                .collect(),
            controls: base
                .controls
                .iter()
                .zip(&self.controls)
                .map(|(u, d)| u + d * alpha)
                .collect(),
        }
    }
}

/// Riccati factor of one control block.
#[derive(Debug, Clone)]
pub struct StageGains {
    /// Feedback gain `K_k`, `n_u × n_x`.
    pub feedback: DMatrix<f64>,
    /// Feedforward `k_k`.
    pub feedforward: DVector<f64>,
    /// `D_k = luu + fuᵀ P_{k+1} fu`.
    pub hessian: DMatrix<f64>,
    /// `d_k = lu + fuᵀ (P_{k+1} b_k + p_{k+1})`.
    pub gradient: DVector<f64>,
    factor: Cholesky,
}

impl StageGains {
    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }
}

/// Output of [`backward_sweep`].
#[derive(Debug, Clone)]
pub struct BackwardPass {
    /// Block of the auxiliary initial control; its feedback is empty.
    pub init: StageGains,
    pub stages: Vec<StageGains>,
    /// Cost-to-go Hessians `P_k` for states `0..=N`.
    pub value_hess: Vec<DMatrix<f64>>,
    /// Cost-to-go gradients `p_k` for states `0..=N`.
    pub value_grad: Vec<DVector<f64>>,
    /// `Σ ½bᵀPb + pᵀb` over all blocks; zero when every defect vanishes.
    affine_value: f64,
}

impl BackwardPass {
    fn blocks(&self) -> impl Iterator<Item = &StageGains> {
        std::iter::once(&self.init).chain(self.stages.iter())
    }

    /// Largest feedforward component over all blocks.
    pub fn max_feedforward(&self) -> f64 {
        self.blocks().fold(0.0, |m, g| m.max(g.feedforward.amax()))
    }
}

/// Runs the backward Riccati recursion.
///
/// Fails with [`Error::NotPositiveDefinite`] when a `D_k` block cannot be
/// Cholesky factorized, which tells the caller to increase regularization.
pub fn backward_sweep(qp: &QpData) -> Result<BackwardPass> {
    let n = qp.horizon();
    let mut value_hess = vec![DMatrix::zeros(0, 0); n + 1];
    let mut value_grad = vec![DVector::zeros(0); n + 1];
    value_hess[n] = qp.vxx.clone();
    value_grad[n] = qp.vx.clone();
    let mut stages = Vec::with_capacity(n);
    let mut affine_value = 0.0;

    for k in (0..n).rev() {
        let s = &qp.stages[k];
        let p_next = &value_hess[k + 1];
        let v_next = &value_grad[k + 1];
        let pb = p_next * &s.defect + v_next;
        let p_fu = p_next * &s.fu;
        let p_fx = p_next * &s.fx;

        let mut hessian = &s.luu + s.fu.transpose() * &p_fu;
        symmetrize(&mut hessian);
        let gradient = &s.lu + s.fu.transpose() * &pb;
        let factor = Cholesky::new(&hessian).ok_or(Error::NotPositiveDefinite {
            block: Block::Stage(k),
        })?;

        let cross = &s.lux + s.fu.transpose() * &p_fx;
        let feedback = -factor.solve(&cross);
        let feedforward = -factor.solve_vec(&gradient);

        let mut p = &s.lxx + s.fx.transpose() * &p_fx + cross.transpose() * &feedback;
        symmetrize(&mut p);
        let v = &s.lx + s.fx.transpose() * &pb + feedback.transpose() * &gradient;

        affine_value += 0.5 * s.defect.dot(&(p_next * &s.defect)) + v_next.dot(&s.defect);
        value_hess[k] = p;
        value_grad[k] = v;
        stages.push(StageGains {
            feedback,
            feedforward,
            hessian,
            gradient,
            factor,
        });
    }
    stages.reverse();

    let b0 = &qp.init_defect;
    let hessian = value_hess[0].clone();
    let gradient = &hessian * b0 + &value_grad[0];
    let factor = Cholesky::new(&hessian).ok_or(Error::NotPositiveDefinite {
        block: Block::Initial,
    })?;
    let feedforward = -factor.solve_vec(&gradient);
    affine_value += 0.5 * b0.dot(&(&hessian * b0)) + value_grad[0].dot(b0);
    let init = StageGains {
        feedback: DMatrix::zeros(hessian.nrows(), 0),
        feedforward,
        hessian,
        gradient,
        factor,
    };
    Ok(BackwardPass {
        init,
        stages,
        value_hess,
        value_grad,
        affine_value,
    })
}

/// Optimal QP objective from the feedforward terms,
/// `Σ ½kᵀDk + kᵀd` plus the affine-defect contribution.
pub fn qp_optimal_objective(bp: &BackwardPass) -> f64 {
    bp.blocks()
        .map(|g| {
            let k = &g.feedforward;
            0.5 * k.dot(&(&g.hessian * k)) + k.dot(&g.gradient)
        })
        .sum::<f64>()
        + bp.affine_value
}

/// The same value as [`qp_optimal_objective`] through `−Σ ½dᵀD⁻¹d`.
pub fn qp_optimal_objective_dual(bp: &BackwardPass) -> f64 {
    -bp.blocks()
        .map(|g| 0.5 * g.gradient.dot(&g.factor.solve_vec(&g.gradient)))
        .sum::<f64>()
        + bp.affine_value
}

/// Forward sweep through the linearized dynamics.
///
/// Controls use feedback on the linearized states; with `alpha = 1` the
/// returned step solves the QP exactly. The trial trajectory is `base + step`.
pub fn linear_rollout(
    bp: &BackwardPass,
    qp: &QpData,
    base: &Trajectory,
    alpha: f64,
) -> (QpStep, Trajectory) {
    let n = qp.horizon();
    let du_init = &bp.init.feedforward * alpha;
    let mut states = Vec::with_capacity(n + 1);
    let mut controls = Vec::with_capacity(n);
    states.push(&du_init + &qp.init_defect);
    for (k, (s, g)) in qp.stages.iter().zip(&bp.stages).enumerate() {
        let du = &g.feedforward * alpha + &g.feedback * &states[k];
        let dx_next = &s.fx * &states[k] + &s.fu * &du + &s.defect;
        controls.push(du);
        states.push(dx_next);
    }
    let step = QpStep {
        init: du_init,
        states,
        controls,
    };
    let trial = step.apply(base, 1.0);
    (step, trial)
}
