//! Feasible trajectory generation for discrete-time optimal control.
//!
//! A constrained OCP is recast as an unconstrained least-squares OCP over the
//! constraint violations ([`ocp::FeasibilityOcp`]) and solved by a
//! Levenberg-Marquardt regularized DDP method with an Armijo line search
//! ([`solver::solve`]). Direct single and multiple shooting variants that reuse
//! the same QP subproblem live in [`baselines`].

pub mod baselines;
pub mod bench;
pub mod error;
pub mod linalg;
pub mod ocp;
pub mod problems;
pub mod riccati;
pub mod solver;

pub use error::{Block, Error, Result};
pub use ocp::{build_feasibility_problem, FeasibilityOcp, OcpModel, Trajectory};
pub use solver::{solve, SolveResult, SolveStatus, SolverSettings};
