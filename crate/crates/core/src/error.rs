use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input shape mismatch: {0}")]
    InputShape(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("r = {r} bohr is outside the grid [{r_min}, {r_max}]")]
    OutOfRange { r: f64, r_min: f64, r_max: f64 },

    #[error("non-finite value at R = {r} bohr")]
    NonFinite { r: f64 },

    #[error("requested {requested} bound states but only {found} lie below the asymptote")]
    TooFewBoundStates { requested: usize, found: usize },

    #[error("Morse fit infeasible: {0}")]
    FitInfeasible(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("R_e minimizer hit the search boundary at {r_e} bohr; widen the window [{lo}, {hi}]")]
    BoundaryHit { r_e: f64, lo: f64, hi: f64 },

    #[error("extracted density is below the cutoff everywhere")]
    NoSupport,

    #[error("numerical failure at R = {r} bohr: {what}")]
    NumericalFailure { r: f64, what: String },

    #[error("empty region '{0}': no reference grid points below the cutoff")]
    EmptyRegion(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
