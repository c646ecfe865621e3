use std::fmt;

/// Identifies the part of the horizon an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// The auxiliary initial-state control and the first state.
    Initial,
    /// Stage `k` (0-based), coupling state `k` and control `k`.
    Stage(usize),
    /// The terminal state.
    Terminal,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Initial => write!(f, "initial block"),
            Block::Stage(k) => write!(f, "stage {k}"),
            Block::Terminal => write!(f, "terminal stage"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch at {block}: {what} has {found}, expected {expected}")]
    DimensionMismatch {
        block: Block,
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("non-finite value in {what} at {block}")]
    NonFinite { block: Block, what: &'static str },
    #[error("Riccati block at {block} is not positive definite")]
    NotPositiveDefinite { block: Block },
    #[error("nonlinear rollout diverged at {block}")]
    RolloutDiverged { block: Block },
    #[error("KKT matrix of the dense QP is singular")]
    SingularKkt,
    #[error("dense QP oracle limited to {limit} unknowns, got {size}")]
    OracleTooLarge { size: usize, limit: usize },
    #[error("regularization parameter overflowed ({mu:e})")]
    RegularizationOverflow { mu: f64 },
    #[error("LQR Riccati iteration did not converge after {iterations} sweeps")]
    LqrNotConverged { iterations: usize },
    #[error("integration produced a non-finite {0}")]
    Integration(&'static str),
    #[error("invalid integrator setting: {0}")]
    InvalidIntegrator(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("performance profile: {0}")]
    Profile(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
