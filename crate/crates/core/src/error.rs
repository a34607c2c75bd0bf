use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("singular spectral configuration: {0}")]
    Singular(String),

    #[error("field does not settle to a vacuum: asymptote is {distance:.3e} away from the nearest multiple of 2π/β")]
    NonDecaying { distance: f64 },

    #[error("truncation: field is {deviation:.3e} from its asymptote at half-width {half_width}")]
    Truncation { half_width: f64, deviation: f64 },

    #[error("branch jump of {jump:.3} rad in ln a between λ = {lambda_prev} and λ = {lambda}")]
    Branch { lambda_prev: f64, lambda: f64, jump: f64 },

    #[error("inconsistent Bäcklund seed: cross-derivative residual {0:.3e}")]
    InconsistentSeed(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
