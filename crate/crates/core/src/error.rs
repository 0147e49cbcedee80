use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An adaptive integrator or iterative solver failed to converge.
    #[error("no convergence at t = {time}: {reason}")]
    NonConvergence { time: f64, reason: String },

    /// A Fock-space operation left its exact interior block.
    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("root not bracketed: {0}")]
    NotBracketed(String),

    /// Trace, Hermiticity or positivity drift beyond the monitored limits.
    #[error("density matrix invariant violated: {0}")]
    InvariantViolation(String),

    /// The generator has more than one stationary state; `basis` spans
    /// its null space.
    #[error("steady state is degenerate (null space of dimension {})", basis.len())]
    DegenerateSteadyState {
        basis: Vec<crate::fock::FockOperator>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures caused by numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Truncation(_)
                | Error::InvariantViolation(_)
                | Error::Numerical(_)
                | Error::NotBracketed(_)
                | Error::DegenerateSteadyState { .. }
        )
    }
}
