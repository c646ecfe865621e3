//! Free-time cart pendulum moving past a circular obstacle.
//!
//! The horizon length `T` is carried as a fifth, constant state and scales
//! the vector field on a unit time grid.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};

use super::rk4::{Rk4Integrator, VectorField};
use crate::error::{Error, Result};
use crate::ocp::{ConstraintLinearization, DynamicsLinearization, OcpModel};

pub const HORIZON: usize = 30;
pub const SUBSTEPS: usize = 10;
pub const CONTROL_BOUND: f64 = 5.0;
pub const STATE_LOWER: [f64; 4] = [-1.0, -2.0, -FRAC_PI_4, -0.5];
pub const STATE_UPPER: [f64; 4] = [6.0, 2.0, FRAC_PI_4, 0.5];
pub const TARGET: [f64; 4] = [5.0, 0.0, 0.0, 0.0];
pub const OBSTACLE_HEIGHT: f64 = 0.9;
pub const OBSTACLE_RADIUS: f64 = 0.3;
pub const MIN_DURATION: f64 = 0.5;
pub const GUESS_DURATION: f64 = 5.0;
pub const OBSTACLE_RANGE: (f64, f64) = (0.7, 4.3);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPoleParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub pole_length: f64,
    pub gravity: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_length: 0.8,
            gravity: 9.81,
        }
    }
}

/// Cart-pole dynamics in `(p, v, θ, ω)` with `θ = 0` upright, multiplied by
/// the duration state `T`.
#[derive(Debug, Clone, Copy)]
pub struct TimeScaledCartPole {
    pub params: CartPoleParams,
}

impl TimeScaledCartPole {
    /// Unscaled accelerations `(v̇, ω̇)` and their partials in `(θ, ω, F)`.
    fn accelerations(&self, theta: f64, omega: f64, force: f64) -> ([f64; 2], [[f64; 3]; 2]) {
        let CartPoleParams {
            cart_mass: big_m,
            pole_mass: m,
            pole_length: l,
            gravity: g,
        } = self.params;
        let (s, c) = theta.sin_cos();
        let den = big_m + m - m * c * c;
        let dden = 2.0 * m * s * c;

        let n1 = -m * l * s * omega * omega + m * g * c * s + force;
        let n1_theta = -m * l * c * omega * omega + m * g * (c * c - s * s);
        let n1_omega = -2.0 * m * l * s * omega;

        let n2 = -m * l * c * s * omega * omega + force * c + (big_m + m) * g * s;
        let n2_theta = -m * l * (c * c - s * s) * omega * omega - force * s + (big_m + m) * g * c;
        let n2_omega = -2.0 * m * l * c * s * omega;

        let vdot = n1 / den;
        let wdot = n2 / (l * den);
        let partials = [
            [
                (n1_theta * den - n1 * dden) / (den * den),
                n1_omega / den,
                1.0 / den,
            ],
            [
                (n2_theta * den - n2 * dden) / (l * den * den),
                n2_omega / (l * den),
                c / (l * den),
            ],
        ];
        ([vdot, wdot], partials)
    }
}

impl VectorField for TimeScaledCartPole {
    fn state_dim(&self) -> usize {
        5
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let t = x[4];
        let ([vdot, wdot], _) = self.accelerations(x[2], x[3], u[0]);
        DVector::from_vec(vec![t * x[1], t * vdot, t * x[3], t * wdot, 0.0])
    }

    fn jacobians(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
        let t = x[4];
        let ([vdot, wdot], d) = self.accelerations(x[2], x[3], u[0]);
        let mut fx = DMatrix::zeros(5, 5);
        fx[(0, 1)] = t;
        fx[(1, 2)] = t * d[0][0];
        fx[(1, 3)] = t * d[0][1];
        fx[(2, 3)] = t;
        fx[(3, 2)] = t * d[1][0];
        fx[(3, 3)] = t * d[1][1];
        fx[(0, 4)] = x[1];
        fx[(1, 4)] = vdot;
        fx[(2, 4)] = x[3];
        fx[(3, 4)] = wdot;
        let fu = DMatrix::from_column_slice(5, 1, &[0.0, t * d[0][2], 0.0, t * d[1][2], 0.0]);
        let value = DVector::from_vec(vec![t * x[1], t * vdot, t * x[3], t * wdot, 0.0]);
        (value, fx, fu)
    }
}

#[derive(Debug, Clone)]
pub struct CartPendulum {
    integrator: Rk4Integrator<TimeScaledCartPole>,
    obstacle_center: [f64; 2],
    horizon: usize,
}

impl CartPendulum {
    pub fn new(obstacle_position: f64) -> Result<Self> {
        Self::with_params(obstacle_position, CartPoleParams::default())
    }

    pub fn with_params(obstacle_position: f64, params: CartPoleParams) -> Result<Self> {
        let (lo, hi) = OBSTACLE_RANGE;
        if !(lo..=hi).contains(&obstacle_position) {
            return Err(Error::InvalidParameter(format!(
                "obstacle position {obstacle_position} outside [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            integrator: Rk4Integrator::new(
                TimeScaledCartPole { params },
                1.0 / HORIZON as f64,
                SUBSTEPS,
            )?,
            obstacle_center: [obstacle_position, OBSTACLE_HEIGHT],
            horizon: HORIZON,
        })
    }

    pub fn params(&self) -> &CartPoleParams {
        &self.integrator.field().params
    }

    pub fn obstacle_center(&self) -> [f64; 2] {
        self.obstacle_center
    }

    /// Pole tip `(p + l sin θ, l cos θ)`.
    pub fn pole_tip(&self, x: &DVector<f64>) -> [f64; 2] {
        let l = self.params().pole_length;
        [x[0] + l * x[2].sin(), l * x[2].cos()]
    }

    /// `r² − ‖tip − center‖²` and its gradient in `(p, θ)`.
    fn obstacle(&self, x: &DVector<f64>) -> (f64, f64, f64) {
        let l = self.params().pole_length;
        let tip = self.pole_tip(x);
        let dx = tip[0] - self.obstacle_center[0];
        let dy = tip[1] - self.obstacle_center[1];
        let value = OBSTACLE_RADIUS * OBSTACLE_RADIUS - (dx * dx + dy * dy);
        let (s, c) = x[2].sin_cos();
        (value, -2.0 * dx, -2.0 * (dx * l * c - dy * l * s))
    }

    /// The constant initial guess: resting at the initial position with `T = 5`.
    pub fn constant_guess(&self) -> crate::ocp::Trajectory {
        let mut x = DVector::zeros(5);
        x[4] = GUESS_DURATION;
        crate::ocp::Trajectory {
            init: x.clone(),
            states: vec![x; self.horizon + 1],
            controls: vec![DVector::zeros(1); self.horizon],
        }
    }

    fn has_state_box(&self, stage: usize) -> bool {
        stage >= 1
    }
}

impl OcpModel for CartPendulum {
    fn state_dim(&self) -> usize {
        5
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> DVector<f64> {
        let mut x = DVector::zeros(5);
        x[4] = GUESS_DURATION;
        x
    }

    fn initial_state_selection(&self) -> Vec<bool> {
        vec![true, true, true, true, false]
    }

    fn dynamics(&self, _stage: usize, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.integrator.step(x, u)
    }

    fn linearize_dynamics(
        &self,
        _stage: usize,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DynamicsLinearization> {
        self.integrator.step_with_jacobians(x, u)
    }

    /// Rows: control bounds (2), state box on stages `≥ 1` (8), obstacle (1),
    /// minimum duration (1).
    fn path_constraint(&self, stage: usize, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.linearize_path_constraint(stage, x, u).value
    }

    fn linearize_path_constraint(
        &self,
        stage: usize,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> ConstraintLinearization {
        let rows = if self.has_state_box(stage) { 12 } else { 4 };
        let mut value = DVector::zeros(rows);
        let mut jac_x = DMatrix::zeros(rows, 5);
        let mut jac_u = DMatrix::zeros(rows, 1);
        value[0] = u[0] - CONTROL_BOUND;
        jac_u[(0, 0)] = 1.0;
        value[1] = -u[0] - CONTROL_BOUND;
        jac_u[(1, 0)] = -1.0;
        let mut r = 2;
        if self.has_state_box(stage) {
            for i in 0..4 {
                value[r] = x[i] - STATE_UPPER[i];
                jac_x[(r, i)] = 1.0;
                value[r + 1] = STATE_LOWER[i] - x[i];
                jac_x[(r + 1, i)] = -1.0;
                r += 2;
            }
        }
        let (obs, dp, dtheta) = self.obstacle(x);
        value[r] = obs;
        jac_x[(r, 0)] = dp;
        jac_x[(r, 2)] = dtheta;
        value[r + 1] = MIN_DURATION - x[4];
        jac_x[(r + 1, 4)] = -1.0;
        ConstraintLinearization {
            value,
            jac_x,
            jac_u,
        }
    }

    fn terminal_constraint(&self, x: &DVector<f64>) -> DVector<f64> {
        self.linearize_terminal_constraint(x).value
    }

    /// Rows: target pair on `(p, v, θ, ω)` (8), obstacle (1), minimum duration (1).
    fn linearize_terminal_constraint(&self, x: &DVector<f64>) -> ConstraintLinearization {
        let mut value = DVector::zeros(10);
        let mut jac_x = DMatrix::zeros(10, 5);
        for i in 0..4 {
            value[2 * i] = x[i] - TARGET[i];
            jac_x[(2 * i, i)] = 1.0;
            value[2 * i + 1] = TARGET[i] - x[i];
            jac_x[(2 * i + 1, i)] = -1.0;
        }
        let (obs, dp, dtheta) = self.obstacle(x);
        value[8] = obs;
        jac_x[(8, 0)] = dp;
        jac_x[(8, 2)] = dtheta;
        value[9] = MIN_DURATION - x[4];
        jac_x[(9, 4)] = -1.0;
        ConstraintLinearization {
            value,
            jac_x,
            jac_u: DMatrix::zeros(10, 0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obstacle_is_clear_at_the_start() {
        let m = CartPendulum::new(2.5).unwrap();
        let x = m.initial_state();
        assert_eq!(m.pole_tip(&x), [0.0, 0.8]);
        let (obs, _, _) = m.obstacle(&x);
        // 0.09 - (2.5^2 + 0.1^2)
        assert!((obs - (0.09 - 6.26)).abs() < 1e-12);
    }

    #[test]
    fn tip_on_the_circle_has_zero_residual() {
        let m = CartPendulum::new(2.5).unwrap();
        let mut x = DVector::zeros(5);
        // upright tip at height 0.8; choose p so the tip lies on the circle
        x[0] = 2.5 - (0.09_f64 - 0.01).sqrt();
        let (obs, _, _) = m.obstacle(&x);
        assert!(obs.abs() < 1e-15);
    }

    #[test]
    fn upright_rest_is_an_equilibrium() {
        let f = TimeScaledCartPole {
            params: CartPoleParams::default(),
        };
        let mut x = DVector::zeros(5);
        x[0] = 1.3;
        x[4] = 5.0;
        assert!(f.eval(&x, &DVector::zeros(1)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn field_is_linear_in_duration() {
        let f = TimeScaledCartPole {
            params: CartPoleParams::default(),
        };
        let x = DVector::from_vec(vec![0.3, -0.4, 0.2, 0.1, 1.7]);
        let mut x2 = x.clone();
        x2[4] *= 2.0;
        let u = DVector::from_element(1, 1.2);
        assert_eq!(f.eval(&x2, &u), f.eval(&x, &u) * 2.0);
    }

    #[test]
    fn obstacle_range_is_enforced() {
        assert!(CartPendulum::new(0.69).is_err());
        assert!(CartPendulum::new(4.31).is_err());
        assert!(CartPendulum::new(0.7).is_ok());
    }

    #[test]
    fn stage_constraint_counts() {
        let m = CartPendulum::new(1.0).unwrap();
        let x = m.initial_state();
        let u = DVector::zeros(1);
        assert_eq!(m.path_constraint(0, &x, &u).len(), 4);
        assert_eq!(m.path_constraint(1, &x, &u).len(), 12);
        assert_eq!(m.terminal_constraint(&x).len(), 10);
    }
}
