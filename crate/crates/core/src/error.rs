use thiserror::Error;

/// Errors emitted by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("moment of order {order} diverges for this weight law")]
    DivergentMoment { order: u32 },

    #[error("root solve failed on bracket [{lo}, {hi}]")]
    RootSolve { lo: f64, hi: f64 },

    #[error("critical divergence: susceptibility denominator vanishes at the critical point")]
    CriticalDivergence,

    #[error("quadrature error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },

    #[error("n = {n} too large for 2^n enumeration (max {max})")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("sampler grid construction failed: {0}")]
    GridConstruction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
