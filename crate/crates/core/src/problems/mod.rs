//! Benchmark problems and the registry used by the CLI.

pub mod cart_pendulum;
pub mod chen_allgoewer;
pub mod lqr;
pub mod rk4;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use cart_pendulum::{CartPendulum, CartPoleParams};
pub use chen_allgoewer::ChenAllgoewer;
pub use lqr::lqr_initial_guess;
pub use rk4::{rk4_step, Rk4Integrator, VectorField};

use crate::error::{Error, Result};
use crate::ocp::{OcpModel, Trajectory};

pub const DEFAULT_OBSTACLE: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    ChenAllgoewer,
    CartPendulum,
}

impl ProblemId {
    pub const ALL: [ProblemId; 2] = [ProblemId::ChenAllgoewer, ProblemId::CartPendulum];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::ChenAllgoewer => "chen_allgoewer",
            ProblemId::CartPendulum => "cart_pendulum",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Parameter overrides for a registered problem.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProblemParams {
    /// Horizontal obstacle position for the cart pendulum.
    pub obstacle: Option<f64>,
}

/// A model together with the initial guess its benchmark prescribes.
#[derive(Clone)]
pub struct ProblemInstance {
    pub id: ProblemId,
    pub params: ProblemParams,
    pub model: Arc<dyn OcpModel>,
    pub guess: Trajectory,
}

pub fn instantiate(id: ProblemId, params: ProblemParams) -> Result<ProblemInstance> {
    match id {
        ProblemId::ChenAllgoewer => {
            if params.obstacle.is_some() {
                return Err(Error::InvalidParameter(
                    "chen_allgoewer takes no obstacle position".into(),
                ));
            }
            let model = ChenAllgoewer::new();
            let guess = lqr_initial_guess(&model)?;
            Ok(ProblemInstance {
                id,
                params,
                model: Arc::new(model),
                guess,
            })
        }
        ProblemId::CartPendulum => {
            let obstacle = params.obstacle.unwrap_or(DEFAULT_OBSTACLE);
            let model = CartPendulum::new(obstacle)?;
            let guess = model.constant_guess();
            Ok(ProblemInstance {
                id,
                params: ProblemParams {
                    obstacle: Some(obstacle),
                },
                model: Arc::new(model),
                guess,
            })
        }
    }
}

pub fn instantiate_by_name(name: &str, params: ProblemParams) -> Result<ProblemInstance> {
    instantiate(name.parse()?, params)
}
