use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The width function collapsed below the configured floor.
    #[error("sigma singularity at t = {t}: sigma = {sigma:e} fell below the floor")]
    Singularity { t: f64, sigma: f64 },

    /// A velocity evaluation with C != 0 landed on a zero of H_n.
    #[error("pole of the velocity field at x = {root}")]
    Pole { root: f64 },

    #[error("point {x} lies within {distance:e} of the pole at {root}")]
    PoleProximity { x: f64, root: f64, distance: f64 },

    #[error("time {t} outside the available range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("non-finite integrand value at {coordinate:?}")]
    Evaluation { coordinate: Vec<f64> },

    #[error("non-finite derivative during integration at t = {t}")]
    Integration { t: f64 },

    #[error("ill-conditioned evaluation at x = {x}: {reason}")]
    Conditioning { x: f64, reason: String },

    #[error("quadrature under-resolved: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Accuracy { estimate: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
