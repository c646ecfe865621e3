#![allow(dead_code)]

use fpddp::ocp::{
    ConstraintLinearization, DynamicsLinearization, FeasibilityOcp, OcpModel, Trajectory,
};
use fpddp::problems::{lqr_initial_guess, CartPendulum, ChenAllgoewer};
use fpddp::riccati::{QpData, QpStage};
use fpddp::solver::control_gradient;
use fpddp::Result;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.gen_range(-scale..scale))
}

/// `MᵀM + shift·I`, symmetric positive definite for `shift > 0`.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize, shift: f64) -> DMatrix<f64> {
    let m = random_matrix(rng, n, n, 1.0);
    m.transpose() * &m + DMatrix::identity(n, n) * shift
}

/// Random OCP-QP with SPD stage Hessians and nonzero dynamics offsets.
pub fn random_qp<R: Rng>(
    rng: &mut R,
    nx: usize,
    nu: usize,
    n: usize,
    with_defects: bool,
) -> QpData {
    let offset = |rng: &mut R, len| {
        if with_defects {
            random_vector(rng, len, 1.0)
        } else {
            DVector::zeros(len)
        }
    };
    let stages = (0..n)
        .map(|_| {
            let h = random_spd(rng, nx + nu, 0.1);
            QpStage {
                fx: random_matrix(rng, nx, nx, 1.0),
                fu: random_matrix(rng, nx, nu, 1.0),
                defect: offset(rng, nx),
                lx: random_vector(rng, nx, 1.0),
                lu: random_vector(rng, nu, 1.0),
                lxx: h.view((0, 0), (nx, nx)).into_owned(),
                lux: h.view((nx, 0), (nu, nx)).into_owned(),
                luu: h.view((nx, nx), (nu, nu)).into_owned(),
            }
        })
        .collect();
    QpData {
        init_defect: offset(rng, nx),
        stages,
        vx: random_vector(rng, nx, 1.0),
        vxx: random_spd(rng, nx, 0.1),
    }
}

/// `x⁺ = A x + B u + c` with box constraints on the controls and a terminal
/// equality written as paired inequalities.
#[derive(Debug, Clone)]
pub struct AffineModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub horizon: usize,
    pub initial: DVector<f64>,
    pub control_bound: f64,
    pub target: DVector<f64>,
}

impl AffineModel {
    pub fn double_integrator(horizon: usize) -> Self {
        Self {
            a: DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]),
            b: DMatrix::from_row_slice(2, 1, &[0.005, 0.1]),
            c: DVector::from_vec(vec![0.0, -0.01]),
            horizon,
            initial: DVector::from_vec(vec![0.0, 0.0]),
            control_bound: 4.0,
            target: DVector::from_vec(vec![1.0, 0.0]),
        }
    }

    pub fn zero_controls(&self) -> Trajectory {
        let nu = self.b.ncols();
        Trajectory::simulate(
            self,
            self.initial.clone(),
            vec![DVector::zeros(nu); self.horizon],
        )
        .unwrap()
    }
}

impl OcpModel for AffineModel {
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    fn control_dim(&self) -> usize {
        self.b.ncols()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> DVector<f64> {
        self.initial.clone()
    }

    fn dynamics(&self, _stage: usize, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.a * x + &self.b * u + &self.c)
    }

    fn linearize_dynamics(
        &self,
        stage: usize,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DynamicsLinearization> {
        Ok(DynamicsLinearization {
            next: self.dynamics(stage, x, u)?,
            fx: self.a.clone(),
            fu: self.b.clone(),
        })
    }

    fn path_constraint(&self, _stage: usize, _x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let nu = u.len();
        DVector::from_fn(2 * nu, |i, _| {
            if i < nu {
                u[i] - self.control_bound
            } else {
                -u[i - nu] - self.control_bound
            }
        })
    }

    fn linearize_path_constraint(
        &self,
        stage: usize,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> ConstraintLinearization {
        let nu = u.len();
        let mut jac_u = DMatrix::zeros(2 * nu, nu);
        for i in 0..nu {
            jac_u[(i, i)] = 1.0;
            jac_u[(i + nu, i)] = -1.0;
        }
        ConstraintLinearization {
            value: self.path_constraint(stage, x, u),
            jac_x: DMatrix::zeros(2 * nu, x.len()),
            jac_u,
        }
    }

    fn terminal_constraint(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = x - &self.target;
        let n = d.len();
        DVector::from_fn(2 * n, |i, _| if i < n { d[i] } else { -d[i - n] })
    }

    fn linearize_terminal_constraint(&self, x: &DVector<f64>) -> ConstraintLinearization {
        let n = x.len();
        let mut jac_x = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            jac_x[(i, i)] = 1.0;
            jac_x[(i + n, i)] = -1.0;
        }
        ConstraintLinearization {
            value: self.terminal_constraint(x),
            jac_x,
            jac_u: DMatrix::zeros(2 * n, 0),
        }
    }
}

/// Central differences of a scalar function.
pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        let step = h * x[i].abs().max(1.0);
        xp[i] += step;
        xm[i] -= step;
        (f(&xp) - f(&xm)) / (2.0 * step)
    })
}

/// Central differences of a vector function, one column per input.
pub fn fd_jacobian(
    f: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    h: f64,
) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..x.len())
        .map(|i| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            let step = h * x[i].abs().max(1.0);
            xp[i] += step;
            xm[i] -= step;
            (f(&xp) - f(&xm)) / (2.0 * step)
        })
        .collect();
    DMatrix::from_columns(&cols)
}

/// `‖a − b‖∞ / max(‖b‖∞, floor)`.
pub fn rel_err_mat(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).amax() / b.amax().max(floor)
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>, floor: f64) -> f64 {
    (a - b).amax() / b.amax().max(floor)
}

/// Stacks `(u_init, u_0, .., u_{N-1})`.
pub fn stack_controls(traj: &Trajectory) -> DVector<f64> {
    let mut v: Vec<f64> = traj.init.iter().copied().collect();
    for u in &traj.controls {
        v.extend(u.iter());
    }
    DVector::from_vec(v)
}

/// Inverse of [`stack_controls`] followed by a forward simulation.
pub fn unstack_and_simulate(model: &dyn OcpModel, v: &DVector<f64>) -> Trajectory {
    let (nx, nu) = (model.state_dim(), model.control_dim());
    let init = v.rows(0, nx).into_owned();
    let controls = (0..model.horizon())
        .map(|k| v.rows(nx + k * nu, nu).into_owned())
        .collect();
    Trajectory::simulate(model, init, controls).unwrap()
}

/// Relative finite-difference step used by the gradient checks.
pub const FD_STEP: f64 = 1e-6;

/// LQR guess with perturbed initial state and controls, re-simulated.
pub fn random_feasible_chen<R: Rng>(rng: &mut R, model: &ChenAllgoewer) -> Trajectory {
    let guess = lqr_initial_guess(model).unwrap();
    let init = &guess.init + DVector::from_fn(2, |_, _| rng.gen_range(-0.1..0.1));
    let controls = guess
        .controls
        .iter()
        .map(|u| u.add_scalar(rng.gen_range(-0.3..0.3)))
        .collect();
    Trajectory::simulate(model, init, controls).unwrap()
}

pub fn random_feasible_cart<R: Rng>(rng: &mut R, model: &CartPendulum) -> Trajectory {
    let init = DVector::from_vec(vec![
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.2..0.2),
        rng.gen_range(-0.2..0.2),
        rng.gen_range(0.8..2.0),
    ]);
    let controls = (0..model.horizon())
        .map(|_| DVector::from_element(1, rng.gen_range(-6.0..6.0)))
        .collect();
    Trajectory::simulate(model, init, controls).unwrap()
}

/// Largest relative error of the stage and terminal gradients in the QP data
/// against central differences of the stage costs.
pub fn stage_gradient_error(focp: &FeasibilityOcp<'_>, traj: &Trajectory) -> f64 {
    let qp = focp.stage_data(traj, 0.0).unwrap();
    let mut worst: f64 = 0.0;
    for (k, s) in qp.stages.iter().enumerate() {
        let (x, u) = (&traj.states[k], &traj.controls[k]);
        let gx = fd_gradient(|x| focp.stage_cost(k, x, u).unwrap(), x, FD_STEP);
        let gu = fd_gradient(|u| focp.stage_cost(k, x, u).unwrap(), u, FD_STEP);
        worst = worst
            .max(rel_err(&s.lx, &gx, 1e-6))
            .max(rel_err(&s.lu, &gu, 1e-6));
    }
    let n = traj.horizon();
    let gn = fd_gradient(|x| focp.terminal_cost(x).unwrap(), &traj.states[n], FD_STEP);
    worst.max(rel_err(&qp.vx, &gn, 1e-6))
}

/// Relative error of the reduced gradient against central differences of
/// the objective with the states simulated from the stacked controls.
pub fn control_gradient_error(focp: &FeasibilityOcp<'_>, traj: &Trajectory) -> f64 {
    let model = focp.model();
    let g = control_gradient(focp, traj).unwrap();
    let mut analytic: Vec<f64> = g.init.iter().copied().collect();
    for gu in &g.controls {
        analytic.extend(gu.iter());
    }
    let analytic = DVector::from_vec(analytic);
    let fd = fd_gradient(
        |v| focp.objective(&unstack_and_simulate(model, v)).unwrap(),
        &stack_controls(traj),
        FD_STEP,
    );
    rel_err(&analytic, &fd, 1e-6)
}

/// Re-simulates a cart-pendulum solution with a separately written RK4 and
/// cart-pole field, then evaluates every constraint directly.
pub fn verify_cart_solution(obstacle: f64, t: &Trajectory) -> std::result::Result<(), String> {
    const STAGES: usize = 30;
    const SUBSTEPS: usize = 10;
    // residual bound implied by an objective of at most 1e-8
    const TOL: f64 = 1.5e-4;
    let (big_m, m, l, g) = (1.0, 0.1, 0.8, 9.81);
    if t.controls.len() != STAGES || t.states.len() != STAGES + 1 {
        return Err("wrong horizon".into());
    }
    let field = |x: &[f64; 5], f: f64| -> [f64; 5] {
        let (s, c) = x[2].sin_cos();
        let den = big_m + m - m * c * c;
        let vdot = (-m * l * s * x[3] * x[3] + m * g * c * s + f) / den;
        let wdot = (-m * l * c * s * x[3] * x[3] + f * c + (big_m + m) * g * s) / (l * den);
        [x[4] * x[1], x[4] * vdot, x[4] * x[3], x[4] * wdot, 0.0]
    };
    let axpy = |x: &[f64; 5], a: f64, k: &[f64; 5]| -> [f64; 5] {
        std::array::from_fn(|i| x[i] + a * k[i])
    };
    let check = |k: usize, x: &[f64; 5]| -> std::result::Result<(), String> {
        let tip = (x[0] + l * x[2].sin(), l * x[2].cos());
        let intrusion = 0.3f64.powi(2) - (tip.0 - obstacle).powi(2) - (tip.1 - 0.9).powi(2);
        if intrusion > TOL {
            return Err(format!(
                "stage {k}: tip inside the obstacle (squared-distance violation {intrusion:e})"
            ));
        }
        if x[4] < 0.5 - TOL {
            return Err(format!("stage {k}: duration {} below 0.5", x[4]));
        }
        if (1..STAGES).contains(&k) {
            let lo = [-1.0, -2.0, -std::f64::consts::FRAC_PI_4, -0.5];
            let hi = [6.0, 2.0, std::f64::consts::FRAC_PI_4, 0.5];
            for i in 0..4 {
                if x[i] < lo[i] - TOL || x[i] > hi[i] + TOL {
                    return Err(format!("stage {k}: state {i} = {} outside the box", x[i]));
                }
            }
        }
        Ok(())
    };

    let mut x: [f64; 5] = std::array::from_fn(|i| t.init[i]);
    for (i, v) in x.iter().take(4).enumerate() {
        if v.abs() > TOL {
            return Err(format!("initial state component {i} = {v}"));
        }
    }
    let h = 1.0 / STAGES as f64 / SUBSTEPS as f64;
    for k in 0..STAGES {
        check(k, &x)?;
        let f = t.controls[k][0];
        if f.abs() > 5.0 + TOL {
            return Err(format!("stage {k}: force {f} beyond the bound"));
        }
        for _ in 0..SUBSTEPS {
            let k1 = field(&x, f);
            let k2 = field(&axpy(&x, 0.5 * h, &k1), f);
            let k3 = field(&axpy(&x, 0.5 * h, &k2), f);
            let k4 = field(&axpy(&x, h, &k3), f);
            x = std::array::from_fn(|i| {
                x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            });
        }
        let stored = &t.states[k + 1];
        let scale = stored.amax().max(1.0);
        for i in 0..5 {
            if (x[i] - stored[i]).abs() > 1e-9 * scale {
                return Err(format!(
                    "stage {}: re-simulated component {i} differs by {:e}",
                    k + 1,
                    x[i] - stored[i]
                ));
            }
        }
    }
    check(STAGES, &x)?;
    let target = [5.0, 0.0, 0.0, 0.0];
    for i in 0..4 {
        if (x[i] - target[i]).abs() > TOL {
            return Err(format!("terminal component {i} = {}", x[i]));
        }
    }
    Ok(())
}
