use nalgebra::{DMatrix, DVector};

use super::{QpData, QpStep};
use crate::error::{Error, Result};

/// Size limit of the dense KKT system.
pub const ORACLE_MAX_UNKNOWNS: usize = 2000;

#[derive(Debug, Clone)]
pub struct DenseQpSolution {
    pub step: QpStep,
    pub objective: f64,
}

/// Solves the OCP-QP by assembling its full KKT system as one dense matrix
/// and factorizing it with full pivoting. Independent of the Riccati path;
/// intended for small test instances.
pub fn dense_qp_oracle(qp: &QpData) -> Result<DenseQpSolution> {
    let (nx, nu, n) = (qp.state_dim(), qp.control_dim(), qp.horizon());
    // layout: [u_init | x_0 .. x_N | u_0 .. u_{N-1}]
    let x_off = |k: usize| nx + k * nx;
    let u_off = |k: usize| nx + (n + 1) * nx + k * nu;
    let n_primal = nx + (n + 1) * nx + n * nu;
    let n_eq = (n + 1) * nx;
    let size = n_primal + n_eq;
    if size > ORACLE_MAX_UNKNOWNS {
        return Err(Error::OracleTooLarge {
            size,
            limit: ORACLE_MAX_UNKNOWNS,
        });
    }

    let mut kkt = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    let mut hess = DMatrix::<f64>::zeros(n_primal, n_primal);
    let mut grad = DVector::<f64>::zeros(n_primal);

    for (k, s) in qp.stages.iter().enumerate() {
        let (xo, uo) = (x_off(k), u_off(k));
        hess.view_mut((xo, xo), (nx, nx)).copy_from(&s.lxx);
        hess.view_mut((uo, uo), (nu, nu)).copy_from(&s.luu);
        hess.view_mut((uo, xo), (nu, nx)).copy_from(&s.lux);
        hess.view_mut((xo, uo), (nx, nu))
            .copy_from(&s.lux.transpose());
        grad.rows_mut(xo, nx).copy_from(&s.lx);
        grad.rows_mut(uo, nu).copy_from(&s.lu);
    }
    let xn = x_off(n);
    hess.view_mut((xn, xn), (nx, nx)).copy_from(&qp.vxx);
    grad.rows_mut(xn, nx).copy_from(&qp.vx);

    // equality rows: x_0 − u_init = b_init; x_{k+1} − fx x_k − fu u_k = b_k
    let mut eq = DMatrix::<f64>::zeros(n_eq, n_primal);
    let mut eq_rhs = DVector::<f64>::zeros(n_eq);
    for i in 0..nx {
        eq[(i, x_off(0) + i)] = 1.0;
        eq[(i, i)] = -1.0;
    }
    eq_rhs.rows_mut(0, nx).copy_from(&qp.init_defect);
    for (k, s) in qp.stages.iter().enumerate() {
        let r = (k + 1) * nx;
        for i in 0..nx {
            eq[(r + i, x_off(k + 1) + i)] = 1.0;
        }
        eq.view_mut((r, x_off(k)), (nx, nx)).copy_from(&(-&s.fx));
        eq.view_mut((r, u_off(k)), (nx, nu)).copy_from(&(-&s.fu));
        eq_rhs.rows_mut(r, nx).copy_from(&s.defect);
    }

    kkt.view_mut((0, 0), (n_primal, n_primal)).copy_from(&hess);
    kkt.view_mut((n_primal, 0), (n_eq, n_primal)).copy_from(&eq);
    kkt.view_mut((0, n_primal), (n_primal, n_eq))
        .copy_from(&eq.transpose());
    rhs.rows_mut(0, n_primal).copy_from(&(-&grad));
    rhs.rows_mut(n_primal, n_eq).copy_from(&eq_rhs);

    let lu = kkt.full_piv_lu();
    if !lu.is_invertible() {
        return Err(Error::SingularKkt);
    }
    let z = lu.solve(&rhs).ok_or(Error::SingularKkt)?;
    let primal = z.rows(0, n_primal).into_owned();
    let objective = grad.dot(&primal) + 0.5 * primal.dot(&(&hess * &primal));

    let step = QpStep {
        init: primal.rows(0, nx).into_owned(),
        states: (0..=n)
            .map(|k| primal.rows(x_off(k), nx).into_owned())
            .collect(),
        controls: (0..n)
            .map(|k| primal.rows(u_off(k), nu).into_owned())
            .collect(),
    };
    Ok(DenseQpSolution { step, objective })
}
