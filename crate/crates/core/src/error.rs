use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("index {index} is outside the valid range (must be >= {min})")]
    Domain { index: usize, min: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("polynomials are not coprime: common root {root} (separation {separation:e})")]
    NotCoprime { root: Complex64, separation: f64 },

    #[error("singular phase {phase}: within {tol:e} of 2*pi*Z ({context})")]
    Singularity {
        phase: f64,
        tol: f64,
        context: String,
    },

    #[error("step domain violated at n = {n}: radicand {radicand} <= 0 for alpha = {alpha}")]
    StepDomain {
        n: usize,
        alpha: Complex64,
        radicand: f64,
    },

    #[error("degenerate Prüfer step at n = {n}: numerator vanishes for alpha = {alpha}")]
    DegenerateStep { n: usize, alpha: Complex64 },

    #[error("n = {n} exceeds the direct-polynomial guard {guard}; use the Prüfer recursion")]
    Range { n: usize, guard: usize },

    #[error("quadrature resolution exhausted ({reason}); best estimate {estimate}")]
    Resolution { estimate: f64, reason: String },

    #[error("order I+J = {order} exceeds configured maximum {max}")]
    OrderLimit { order: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
