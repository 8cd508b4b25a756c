use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Geometric validity lost: non-star-shaped graph, nonpositive radius,
    /// or a vanishing support function where a sign is required.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Rejection sampling starved: the acceptance rate fell below the floor
    /// before the requested number of samples was produced.
    #[error(
        "sampler starved: accepted {accepted} of {proposed} proposals \
         (rate {rate:.3e}, floor {floor:.1e})"
    )]
    SamplerStarved {
        accepted: u64,
        proposed: u64,
        rate: f64,
        floor: f64,
    },

    /// An iteration failed to converge; carries the residual trace so the
    /// caller can report it instead of guessing.
    #[error("no convergence after {iterations} iterations ({reason}); residual history: {history:?}")]
    NonConvergence {
        iterations: usize,
        reason: String,
        history: Vec<f64>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// An expression or input file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}
