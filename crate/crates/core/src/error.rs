use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// ψ was evaluated at (or past) its declared singular time.
    #[error("integrand is singular at t = {time}")]
    Singular { time: f64 },

    /// `∫₀ᵗ ψ² du` is infinite. `diverged_at` is the first time at which the
    /// running integral is known to be infinite or to exceed the cap.
    #[error("phi diverges on [0, {horizon}] (first exceeded at t = {diverged_at})")]
    Divergent { horizon: f64, diverged_at: f64 },

    #[error("enumeration of order {order} exceeds the guard of {limit} ({count} pairings)")]
    Capacity { order: usize, limit: usize, count: u128 },

    #[error("invalid integrand: {0}")]
    InvalidSpec(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not reach tolerance {tol:e} (last estimate {estimate}, error {error:e})")]
    Quadrature { tol: f64, estimate: f64, error: f64 },

    #[error("not enough samples: {n} < {required}")]
    TooFewSamples { n: usize, required: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
