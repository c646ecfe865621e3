//! Explicit RK4 discretization with forward sensitivity propagation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::ocp::DynamicsLinearization;

/// Continuous-time vector field `ẋ = f(x, u)`.
pub trait VectorField: Send + Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;
    /// Value and Jacobians `(f, ∂f/∂x, ∂f/∂u)`.
    fn jacobians(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>);
}

/// `m` classical RK4 substeps over an interval of length `h`, control held
/// constant.
#[derive(Debug, Clone)]
pub struct Rk4Integrator<F> {
    field: F,
    interval: f64,
    substeps: usize,
}

impl<F: VectorField> Rk4Integrator<F> {
    pub fn new(field: F, interval: f64, substeps: usize) -> Result<Self> {
        if !(interval > 0.0) || !interval.is_finite() {
            return Err(Error::InvalidIntegrator(format!(
                "interval must be positive, got {interval}"
            )));
        }
        if substeps == 0 {
            return Err(Error::InvalidIntegrator(
                "at least one substep required".into(),
            ));
        }
        Ok(Self {
            field,
            interval,
            substeps,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        let h = self.interval / self.substeps as f64;
        let mut x = x.clone();
        for _ in 0..self.substeps {
            let k1 = self.field.eval(&x, u);
            let k2 = self.field.eval(&(&x + &k1 * (0.5 * h)), u);
            let k3 = self.field.eval(&(&x + &k2 * (0.5 * h)), u);
            let k4 = self.field.eval(&(&x + &k3 * h), u);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            if !all_finite(&x) {
                return Err(Error::Integration("state"));
            }
        }
        Ok(x)
    }

    /// Integrates and propagates `G = ∂x/∂(x_0, u)` through every stage of
    /// every substep, so the Jacobians are exact for the discrete map.
    pub fn step_with_jacobians(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<DynamicsLinearization> {
        let (nx, nu) = (self.field.state_dim(), self.field.control_dim());
        let h = self.interval / self.substeps as f64;
        let mut x = x.clone();
        let mut sens = DMatrix::<f64>::zeros(nx, nx + nu);
        sens.view_mut((0, 0), (nx, nx)).fill_with_identity();

        // sensitivity of one RK4 stage: dk = Jx (G + c·dk_prev) + [0 | Ju]
        let stage = |point: &DVector<f64>, g: &DMatrix<f64>| {
            let (k, jx, ju) = self.field.jacobians(point, u);
            let mut dk = &jx * g;
            let mut tail = dk.view_mut((0, nx), (nx, nu));
            tail += ju;
            (k, dk)
        };

        for _ in 0..self.substeps {
            let (k1, d1) = stage(&x, &sens);
            let (k2, d2) = stage(&(&x + &k1 * (0.5 * h)), &(&sens + &d1 * (0.5 * h)));
            let (k3, d3) = stage(&(&x + &k2 * (0.5 * h)), &(&sens + &d2 * (0.5 * h)));
            let (k4, d4) = stage(&(&x + &k3 * h), &(&sens + &d3 * h));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            sens += (d1 + d2 * 2.0 + d3 * 2.0 + d4) * (h / 6.0);
            if !all_finite(&x) || sens.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration("sensitivity"));
            }
        }
        Ok(DynamicsLinearization {
            next: x,
            fx: sens.view((0, 0), (nx, nx)).into_owned(),
            fu: sens.view((0, nx), (nx, nu)).into_owned(),
        })
    }
}

/// One discretization step of `field`; see [`Rk4Integrator::step_with_jacobians`].
pub fn rk4_step<F: VectorField + Clone>(
    field: &F,
    x: &DVector<f64>,
    u: &DVector<f64>,
    interval: f64,
    substeps: usize,
) -> Result<DynamicsLinearization> {
    Rk4Integrator::new(field.clone(), interval, substeps)?.step_with_jacobians(x, u)
}
