use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A time step exceeds one of the stability limits.
    #[error("step rejected: dt = {dt:e} exceeds the {rule} limit {limit:e}")]
    StepRejected {
        rule: &'static str,
        dt: f64,
        limit: f64,
    },

    /// An iterative linear solve did not reach its tolerance.
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDivergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Two fields passed to the same operation live on different grids.
    #[error("domain mismatch between fields")]
    DomainMismatch,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for stability-limit rejections, which a caller may retry with a smaller step.
    pub fn is_step_rejection(&self) -> bool {
        match self {
            Error::StepRejected { .. } => true,
            Error::Step { source, .. } => source.is_step_rejection(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
