//! Fixed-time point-to-point motion of an unstable two-state system.

use nalgebra::{DMatrix, DVector};

use super::rk4::{Rk4Integrator, VectorField};
use crate::error::Result;
use crate::ocp::{ConstraintLinearization, DynamicsLinearization, OcpModel};

pub const ZETA: f64 = 0.7;
pub const INTERVAL: f64 = 0.25;
pub const SUBSTEPS: usize = 10;
pub const HORIZON: usize = 20;
pub const CONTROL_BOUND: f64 = 1.5;
pub const INITIAL_STATE: [f64; 2] = [0.42, 0.45];
pub const TERMINAL_STATE: [f64; 2] = [0.0, 0.1];

/// `ẋ₁ = x₂ + u(ζ + (1−ζ)x₂)`, `ẋ₂ = x₁ + u(ζ − 4(1−ζ)x₂)`.
#[derive(Debug, Clone, Copy)]
pub struct ChenAllgoewerField {
    pub zeta: f64,
}

impl VectorField for ChenAllgoewerField {
    fn state_dim(&self) -> usize {
        2
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let z = self.zeta;
        let u = u[0];
        DVector::from_vec(vec![
            x[1] + u * (z + (1.0 - z) * x[1]),
            x[0] + u * (z - 4.0 * (1.0 - z) * x[1]),
        ])
    }

    fn jacobians(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
        let z = self.zeta;
        let uu = u[0];
        let fx = DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0 + uu * (1.0 - z), 1.0, -4.0 * (1.0 - z) * uu],
        );
        let fu = DMatrix::from_row_slice(2, 1, &[z + (1.0 - z) * x[1], z - 4.0 * (1.0 - z) * x[1]]);
        (self.eval(x, u), fx, fu)
    }
}

#[derive(Debug, Clone)]
pub struct ChenAllgoewer {
    integrator: Rk4Integrator<ChenAllgoewerField>,
    horizon: usize,
    control_bound: f64,
    initial: DVector<f64>,
    target: DVector<f64>,
}

impl ChenAllgoewer {
    pub fn new() -> Self {
        Self {
            integrator: Rk4Integrator::new(ChenAllgoewerField { zeta: ZETA }, INTERVAL, SUBSTEPS)
                .expect("constant integrator settings are valid"),
            horizon: HORIZON,
            control_bound: CONTROL_BOUND,
            initial: DVector::from_column_slice(&INITIAL_STATE),
            target: DVector::from_column_slice(&TERMINAL_STATE),
        }
    }

    pub fn integrator(&self) -> &Rk4Integrator<ChenAllgoewerField> {
        &self.integrator
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }

    pub fn control_bound(&self) -> f64 {
        self.control_bound
    }
}

impl Default for ChenAllgoewer {
    fn default() -> Self {
        Self::new()
    }
}

impl OcpModel for ChenAllgoewer {
    fn state_dim(&self) -> usize {
        2
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> DVector<f64> {
        self.initial.clone()
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

    fn path_constraint(&self, _stage: usize, _x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![u[0] - self.control_bound, -u[0] - self.control_bound])
    }

    fn linearize_path_constraint(
        &self,
        stage: usize,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> ConstraintLinearization {
        ConstraintLinearization {
            value: self.path_constraint(stage, x, u),
            jac_x: DMatrix::zeros(2, 2),
            jac_u: DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
        }
    }

    /// The terminal equality as the pair `x − x_T <= 0`, `x_T − x <= 0`.
    fn terminal_constraint(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = x - &self.target;
        DVector::from_vec(vec![d[0], d[1], -d[0], -d[1]])
    }

    fn linearize_terminal_constraint(&self, x: &DVector<f64>) -> ConstraintLinearization {
        let mut jac_x = DMatrix::zeros(4, 2);
        for i in 0..2 {
            jac_x[(i, i)] = 1.0;
            jac_x[(i + 2, i)] = -1.0;
        }
        ConstraintLinearization {
            value: self.terminal_constraint(x),
            jac_x,
            jac_u: DMatrix::zeros(4, 0),
        }
    }
}
