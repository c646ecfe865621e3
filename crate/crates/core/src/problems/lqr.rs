use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::ocp::{OcpModel, Trajectory};

pub const MAX_RICCATI_SWEEPS: usize = 10_000;

/// Infinite-horizon discrete LQR gain `K` (with `u = −K x`) from fixed-point
/// iteration of the Riccati equation.
pub fn dlqr_gain(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let mut p = q.clone();
    for _ in 0..MAX_RICCATI_SWEEPS {
        let btp = b.transpose() * &p;
        let chol =
            Cholesky::new(&(r + &btp * b)).ok_or(Error::LqrNotConverged { iterations: 0 })?;
        let gain = chol.solve(&(&btp * a));
        let next = q + a.transpose() * &p * a - a.transpose() * &p * b * &gain;
        let change = (&next - &p).amax();
        p = next;
        if change <= 1e-12 * p.amax().max(1.0) {
            let btp = b.transpose() * &p;
            let chol =
                Cholesky::new(&(r + &btp * b)).ok_or(Error::LqrNotConverged { iterations: 0 })?;
            return Ok(chol.solve(&(&btp * a)));
        }
    }
    Err(Error::LqrNotConverged {
        iterations: MAX_RICCATI_SWEEPS,
    })
}

/// Closed-loop simulation under the LQR law of the dynamics linearized at
/// the origin with identity weights. Controls are not clipped.
pub fn lqr_initial_guess(model: &dyn OcpModel) -> Result<Trajectory> {
    let (nx, nu) = (model.state_dim(), model.control_dim());
    let lin = model.linearize_dynamics(0, &DVector::zeros(nx), &DVector::zeros(nu))?;
    let gain = dlqr_gain(
        &lin.fx,
        &lin.fu,
        &DMatrix::identity(nx, nx),
        &DMatrix::identity(nu, nu),
    )?;
    let x0 = model.initial_state();
    let mut states = vec![x0.clone()];
    let mut controls = Vec::with_capacity(model.horizon());
    for k in 0..model.horizon() {
        let u = -(&gain * &states[k]);
        states.push(model.dynamics(k, &states[k], &u)?);
        controls.push(u);
    }
    Ok(Trajectory {
        init: x0,
        states,
        controls,
    })
}
