use crate::error::{Error, Result};

/// Parameters of the feasibility solver. Defaults follow the published
/// benchmark configuration; the iteration caps are ours.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Armijo sufficient-decrease constant, in `(0, 1)`.
    pub armijo: f64,
    /// Smallest step size before the iteration is restarted with more
    /// regularization.
    pub min_step: f64,
    /// Stop when the objective is at or below this value.
    pub feasibility_tol: f64,
    /// Stop when `‖∇F‖∞` is at or below this value.
    pub stationarity_tol: f64,
    pub mu_min: f64,
    pub mu_init: f64,
    /// Factor by which `μ` grows or shrinks, `> 1`.
    pub mu_factor: f64,
    pub max_iter: usize,
    /// Consecutive regularization increases tolerated within one iteration
    /// before giving up.
    pub max_reg_restarts: usize,
}

/// `μ` beyond this value is treated as a regularization failure.
pub const MU_MAX: f64 = 1e20;

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            armijo: 1e-6,
            min_step: 1e-17,
            feasibility_tol: 1e-12,
            stationarity_tol: 1e-8,
            mu_min: 1e-16,
            mu_init: 1e-3,
            mu_factor: 5.0,
            max_iter: 200,
            max_reg_restarts: 30,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("Armijo constant must lie in (0, 1)");
        }
        if !(self.mu_factor > 1.0) {
            return bad("regularization factor must exceed 1");
        }
        if !(self.mu_min > 0.0 && self.mu_init > self.mu_min) {
            return bad("need mu_init > mu_min > 0");
        }
        if !(self.min_step > 0.0 && self.min_step < 1.0) {
            return bad("minimum step must lie in (0, 1)");
        }
        if !(self.feasibility_tol >= 0.0 && self.stationarity_tol >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        Ok(())
    }
}
