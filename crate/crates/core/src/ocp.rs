//! OCP model interface, trajectories, and the derived feasibility problem.
//!
//! Stages are 0-based: stage `k` couples state `k` and control `k` and maps
//! them to state `k + 1`, for `k = 0..N`. State `N` is the terminal state.
//! The auxiliary control that softens the initial condition is stored
//! separately as [`Trajectory::init`]; a dynamically feasible trajectory has
//! `states[0] == init`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Block, Error, Result};
use crate::linalg::{all_finite, inf_norm, positive_part};
use crate::riccati::{QpData, QpStage};

/// Discrete dynamics value together with its Jacobians.
#[derive(Debug, Clone)]
pub struct DynamicsLinearization {
    pub next: DVector<f64>,
    /// Jacobian with respect to the state, `n_x × n_x`.
    pub fx: DMatrix<f64>,
    /// Jacobian with respect to the control, `n_x × n_u`.
    pub fu: DMatrix<f64>,
}

/// Inequality residual `c(x, u) <= 0` together with its Jacobians.
#[derive(Debug, Clone)]
pub struct ConstraintLinearization {
    pub value: DVector<f64>,
    pub jac_x: DMatrix<f64>,
    /// Empty (`n_c × 0`) for terminal constraints.
    pub jac_u: DMatrix<f64>,
}

impl ConstraintLinearization {
    pub fn empty(nx: usize, nu: usize) -> Self {
        Self {
            value: DVector::zeros(0),
            jac_x: DMatrix::zeros(0, nx),
            jac_u: DMatrix::zeros(0, nu),
        }
    }
}

/// A discrete-time optimal control problem without stage costs.
///
/// Implementations must be pure functions of their inputs so that one model
/// can be evaluated from several threads at once.
pub trait OcpModel: Send + Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    /// Number of stages `N`.
    fn horizon(&self) -> usize;
    /// The prescribed initial state.
    fn initial_state(&self) -> DVector<f64>;

    /// Which components of [`OcpModel::initial_state`] are prescribed.
    /// Unselected components (e.g. a free horizon length carried as a state)
    /// do not enter the soft initial condition.
    fn initial_state_selection(&self) -> Vec<bool> {
        vec![true; self.state_dim()]
    }

    fn dynamics(&self, stage: usize, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>>;

    fn linearize_dynamics(
        &self,
        stage: usize,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DynamicsLinearization>;

    fn path_constraint(&self, _stage: usize, _x: &DVector<f64>, _u: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(0)
    }

    fn linearize_path_constraint(
        &self,
        _stage: usize,
        _x: &DVector<f64>,
        _u: &DVector<f64>,
    ) -> ConstraintLinearization {
        ConstraintLinearization::empty(self.state_dim(), self.control_dim())
    }

    fn terminal_constraint(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(0)
    }

    fn linearize_terminal_constraint(&self, _x: &DVector<f64>) -> ConstraintLinearization {
        ConstraintLinearization::empty(self.state_dim(), 0)
    }
}

/// States `x_0..=x_N`, controls `u_0..u_{N-1}` and the auxiliary initial control.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub init: DVector<f64>,
    pub states: Vec<DVector<f64>>,
    pub controls: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.controls.len()
    }

    /// Simulates the dynamics forward from `init` under `controls`.
    pub fn simulate(
        model: &dyn OcpModel,
        init: DVector<f64>,
        controls: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let mut states = Vec::with_capacity(controls.len() + 1);
        states.push(init.clone());
        for (k, u) in controls.iter().enumerate() {
            let next = model.dynamics(k, &states[k], u)?;
            if !all_finite(&next) {
                return Err(Error::RolloutDiverged {
                    block: Block::Stage(k),
                });
            }
            states.push(next);
        }
        Ok(Self {
            init,
            states,
            controls,
        })
    }

    pub fn check_dims(&self, model: &dyn OcpModel) -> Result<()> {
        let (nx, nu, n) = (model.state_dim(), model.control_dim(), model.horizon());
        let mismatch = |block, what, expected: usize, found: usize| Error::DimensionMismatch {
            block,
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        };
        if self.controls.len() != n {
            return Err(mismatch(
                Block::Terminal,
                "control count",
                n,
                self.controls.len(),
            ));
        }
        if self.states.len() != n + 1 {
            return Err(mismatch(
                Block::Terminal,
                "state count",
                n + 1,
                self.states.len(),
            ));
        }
        if self.init.len() != nx {
            return Err(mismatch(
                Block::Initial,
                "auxiliary control",
                nx,
                self.init.len(),
            ));
        }
        for (k, x) in self.states.iter().enumerate() {
            if x.len() != nx {
                return Err(mismatch(Block::Stage(k), "state", nx, x.len()));
            }
        }
        for (k, u) in self.controls.iter().enumerate() {
            if u.len() != nu {
                return Err(mismatch(Block::Stage(k), "control", nu, u.len()));
            }
        }
        Ok(())
    }

    /// Largest componentwise difference over all states and controls.
    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        let mut m = (&self.init - &other.init).amax();
        for (a, b) in self.states.iter().zip(&other.states) {
            m = m.max((a - b).amax());
        }
        for (a, b) in self.controls.iter().zip(&other.controls) {
            m = m.max((a - b).amax());
        }
        m
    }
}

/// Max-norm of the dynamics defects, including `x_0 - u_init`.
pub fn dynamics_defect(model: &dyn OcpModel, traj: &Trajectory) -> Result<f64> {
    let mut defect = (&traj.states[0] - &traj.init).amax();
    for k in 0..traj.horizon() {
        let next = model.dynamics(k, &traj.states[k], &traj.controls[k])?;
        defect = defect.max((&traj.states[k + 1] - next).amax());
    }
    Ok(defect)
}

/// The individual dynamics defects `x_0 - u_init` and `x_{k+1} - φ_k(x_k, u_k)`.
pub fn dynamics_defects(model: &dyn OcpModel, traj: &Trajectory) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(traj.horizon() + 1);
    out.push(&traj.states[0] - &traj.init);
    for k in 0..traj.horizon() {
        let next = model.dynamics(k, &traj.states[k], &traj.controls[k])?;
        out.push(&traj.states[k + 1] - next);
    }
    Ok(out)
}

/// Constraint violation `‖v(w)‖∞` split by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub initial: f64,
    pub dynamics: f64,
    pub path: f64,
    pub terminal: f64,
    /// Largest clipped path residual per stage.
    pub path_per_stage: Vec<f64>,
}

impl ViolationReport {
    pub fn max(&self) -> f64 {
        self.initial
            .max(self.dynamics)
            .max(self.path)
            .max(self.terminal)
    }

    pub fn is_zero(&self) -> bool {
        self.max() == 0.0
    }
}

pub fn violation_report(model: &dyn OcpModel, traj: &Trajectory) -> Result<ViolationReport> {
    traj.check_dims(model)?;
    let selection = model.initial_state_selection();
    let initial = (&traj.states[0] - model.initial_state())
        .iter()
        .zip(&selection)
        .filter(|(_, &fixed)| fixed)
        .fold(0.0_f64, |m, (d, _)| m.max(d.abs()));
    let dynamics = dynamics_defect(model, traj)?;
    let path_per_stage: Vec<f64> = (0..traj.horizon())
        .map(|k| {
            inf_norm(&positive_part(&model.path_constraint(
                k,
                &traj.states[k],
                &traj.controls[k],
            )))
        })
        .collect();
    let path = path_per_stage.iter().copied().fold(0.0, f64::max);
    let terminal = inf_norm(&positive_part(
        &model.terminal_constraint(&traj.states[traj.horizon()]),
    ));
    Ok(ViolationReport {
        initial,
        dynamics,
        path,
        terminal,
        path_per_stage,
    })
}

/// The unconstrained least-squares OCP whose zeros are the feasible points.
///
/// Stage 0 carries `½‖x_0 − x̄‖² + ½‖[c_0]⁺‖²`, stages `k ≥ 1` carry
/// `½‖[c_k]⁺‖²` and the terminal stage `½‖[c_N]⁺‖²`.
#[derive(Clone)]
pub struct FeasibilityOcp<'a> {
    model: &'a dyn OcpModel,
    x_init: DVector<f64>,
    /// 1 for prescribed initial components, 0 otherwise.
    init_weight: DVector<f64>,
}

/// Checks the model's declared dimensions at the initial state and zero
/// controls and wraps it as a feasibility problem.
pub fn build_feasibility_problem(model: &dyn OcpModel) -> Result<FeasibilityOcp<'_>> {
    let (nx, nu) = (model.state_dim(), model.control_dim());
    let x_init = model.initial_state();
    let x_init = &x_init;
    let shape = |r: usize, c: usize| format!("{r}x{c}");
    if x_init.len() != nx {
        return Err(Error::DimensionMismatch {
            block: Block::Initial,
            what: "initial state",
            expected: nx.to_string(),
            found: x_init.len().to_string(),
        });
    }
    let u = DVector::zeros(nu);
    for k in 0..model.horizon() {
        let lin = model.linearize_dynamics(k, x_init, &u)?;
        let block = Block::Stage(k);
        if lin.next.len() != nx {
            return Err(Error::DimensionMismatch {
                block,
                what: "dynamics value",
                expected: nx.to_string(),
                found: lin.next.len().to_string(),
            });
        }
        if lin.fx.shape() != (nx, nx) || lin.fu.shape() != (nx, nu) {
            return Err(Error::DimensionMismatch {
                block,
                what: "dynamics Jacobian",
                expected: format!("{} and {}", shape(nx, nx), shape(nx, nu)),
                found: format!(
                    "{} and {}",
                    shape(lin.fx.nrows(), lin.fx.ncols()),
                    shape(lin.fu.nrows(), lin.fu.ncols())
                ),
            });
        }
        let c = model.linearize_path_constraint(k, x_init, &u);
        let nc = c.value.len();
        if c.jac_x.shape() != (nc, nx) || c.jac_u.shape() != (nc, nu) {
            return Err(Error::DimensionMismatch {
                block,
                what: "path constraint Jacobian",
                expected: format!("{} and {}", shape(nc, nx), shape(nc, nu)),
                found: format!(
                    "{} and {}",
                    shape(c.jac_x.nrows(), c.jac_x.ncols()),
                    shape(c.jac_u.nrows(), c.jac_u.ncols())
                ),
            });
        }
    }
    let c = model.linearize_terminal_constraint(x_init);
    let nc = c.value.len();
    if c.jac_x.shape() != (nc, nx) {
        return Err(Error::DimensionMismatch {
            block: Block::Terminal,
            what: "terminal constraint Jacobian",
            expected: shape(nc, nx),
            found: shape(c.jac_x.nrows(), c.jac_x.ncols()),
        });
    }
    let selection = model.initial_state_selection();
    if selection.len() != nx {
        return Err(Error::DimensionMismatch {
            block: Block::Initial,
            what: "initial state selection",
            expected: nx.to_string(),
            found: selection.len().to_string(),
        });
    }
    let init_weight =
        DVector::from_iterator(nx, selection.iter().map(|&b| if b { 1.0 } else { 0.0 }));
    Ok(FeasibilityOcp {
        model,
        x_init: x_init.clone(),
        init_weight,
    })
}

impl<'a> FeasibilityOcp<'a> {
    pub fn model(&self) -> &'a dyn OcpModel {
        self.model
    }

    pub fn initial_state(&self) -> &DVector<f64> {
        &self.x_init
    }

    /// Residual of the soft initial condition, zero in unselected components.
    pub fn initial_residual(&self, x0: &DVector<f64>) -> DVector<f64> {
        (x0 - &self.x_init).component_mul(&self.init_weight)
    }

    pub fn stage_cost(&self, stage: usize, x: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
        let c = self.model.path_constraint(stage, x, u);
        if !all_finite(&c) {
            return Err(Error::NonFinite {
                block: Block::Stage(stage),
                what: "path constraint",
            });
        }
        let mut cost = 0.5 * positive_part(&c).norm_squared();
        if stage == 0 {
            cost += 0.5
                * (x - &self.x_init)
                    .component_mul(&self.init_weight)
                    .norm_squared();
        }
        Ok(cost)
    }

    pub fn terminal_cost(&self, x: &DVector<f64>) -> Result<f64> {
        let c = self.model.terminal_constraint(x);
        if !all_finite(&c) {
            return Err(Error::NonFinite {
                block: Block::Terminal,
                what: "terminal constraint",
            });
        }
        Ok(0.5 * positive_part(&c).norm_squared())
    }

    /// `f(x, u)`: the sum of all stage costs. Does not look at the dynamics.
    pub fn objective(&self, traj: &Trajectory) -> Result<f64> {
        traj.check_dims(self.model)?;
        let mut f = self.terminal_cost(&traj.states[traj.horizon()])?;
        for k in 0..traj.horizon() {
            f += self.stage_cost(k, &traj.states[k], &traj.controls[k])?;
        }
        if !f.is_finite() {
            return Err(Error::NonFinite {
                block: Block::Terminal,
                what: "objective",
            });
        }
        Ok(f)
    }

    /// Builds the QP subproblem at `traj` with the Gauss-Newton Hessian
    /// regularized by `gamma · I`.
    ///
    /// Rows with residual exactly zero are treated as inactive. The dynamics
    /// offsets are `φ_k(x_k, u_k) − x_{k+1}` and `u_init − x_0`, which vanish
    /// on dynamically feasible trajectories.
    pub fn stage_data(&self, traj: &Trajectory, gamma: f64) -> Result<QpData> {
        traj.check_dims(self.model)?;
        let (nx, nu) = (self.model.state_dim(), self.model.control_dim());
        let n = traj.horizon();
        let mut stages = Vec::with_capacity(n);
        for k in 0..n {
            let (x, u) = (&traj.states[k], &traj.controls[k]);
            let dynamics = self.model.linearize_dynamics(k, x, u)?;
            if !all_finite(&dynamics.next) {
                return Err(Error::NonFinite {
                    block: Block::Stage(k),
                    what: "dynamics",
                });
            }
            let c = self.model.linearize_path_constraint(k, x, u);
            if !all_finite(&c.value) {
                return Err(Error::NonFinite {
                    block: Block::Stage(k),
                    what: "path constraint",
                });
            }
            let mut jac = DMatrix::zeros(c.value.len(), nx + nu);
            jac.view_mut((0, 0), (c.value.len(), nx))
                .copy_from(&c.jac_x);
            jac.view_mut((0, nx), (c.value.len(), nu))
                .copy_from(&c.jac_u);
            let (mut grad, mut hess) = gauss_newton(&c.value, &jac);
            if k == 0 {
                let offset = (x - &self.x_init).component_mul(&self.init_weight);
                for i in 0..nx {
                    grad[i] += offset[i];
                    hess[(i, i)] += self.init_weight[i];
                }
            }
            for i in 0..nx + nu {
                hess[(i, i)] += gamma;
            }
            stages.push(QpStage {
                defect: dynamics.next - &traj.states[k + 1],
                fx: dynamics.fx,
                fu: dynamics.fu,
                lx: grad.rows(0, nx).into_owned(),
                lu: grad.rows(nx, nu).into_owned(),
                lxx: hess.view((0, 0), (nx, nx)).into_owned(),
                lux: hess.view((nx, 0), (nu, nx)).into_owned(),
                luu: hess.view((nx, nx), (nu, nu)).into_owned(),
            });
        }
        let c = self.model.linearize_terminal_constraint(&traj.states[n]);
        if !all_finite(&c.value) {
            return Err(Error::NonFinite {
                block: Block::Terminal,
                what: "terminal constraint",
            });
        }
        let (vx, mut vxx) = gauss_newton(&c.value, &c.jac_x);
        for i in 0..nx {
            vxx[(i, i)] += gamma;
        }
        Ok(QpData {
            init_defect: &traj.init - &traj.states[0],
            stages,
            vx,
            vxx,
        })
    }
}

/// Gradient `Jᵀ[c]⁺` and Gauss-Newton Hessian `J_aᵀ J_a` of `½‖[c]⁺‖²`,
/// where `J_a` keeps the rows with strictly positive residual.
fn gauss_newton(value: &DVector<f64>, jac: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = jac.ncols();
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    for (row, &r) in value.iter().enumerate() {
        if r > 0.0 {
            let j = jac.row(row);
            grad += j.transpose() * r;
            hess += j.transpose() * j;
        }
    }
    (grad, hess)
}
