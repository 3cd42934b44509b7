use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-finite argument: {0}")]
    NonFiniteArgument(f64),

    #[error(
        "accuracy not achieved for E_{{{alpha},{beta}}}({z}): estimated relative error {estimate:e}"
    )]
    AccuracyNotAchieved {
        alpha: f64,
        beta: f64,
        z: f64,
        estimate: f64,
    },

    #[error("solver diverged at node {node} (t = {time}): component {component} = {value}")]
    Divergence {
        node: usize,
        time: f64,
        component: usize,
        value: f64,
    },

    #[error("grid of {nodes} nodes exceeds the configured cap of {cap}")]
    NodeCapExceeded { nodes: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("equilibrium {0} does not exist for these parameters")]
    NonexistentEquilibrium(&'static str),

    #[error("state outside the admissible region: {0}")]
    InadmissibleState(String),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
