use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("not a graph: {0}")]
    NotAGraph(String),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("invalid expansion: {0}")]
    InvalidExpansion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
