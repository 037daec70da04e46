use thiserror::Error;

/// Errors raised by the numerical kernels and the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular evaluation: lambda = {lambda} lies within {distance:e} of pole {pole}")]
    Singular {
        lambda: String,
        pole: String,
        distance: f64,
    },

    #[error("degenerate critical point at {0}: use the uniform (Pearcey) treatment")]
    DegenerateCriticalPoint(String),

    #[error("contour assembly failed: best candidate relative error {best_rel_err:e}")]
    Assembly { best_rel_err: f64, best: Vec<i8> },

    #[error("quadrature did not converge on segment {segment}")]
    Quadrature { segment: usize },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("extrapolation diverged: {0}")]
    Extrapolation(String),

    #[error("shooting failed at lambda = {lambda}: {reason}")]
    Shooting { lambda: f64, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
