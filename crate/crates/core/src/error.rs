use thiserror::Error;

use crate::hilbert::Operator;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fock truncation n_max = {0} is invalid (must be at least 1)")]
    InvalidTruncation(usize),

    #[error("operator dimension {0} exceeds the dense limit of 16384")]
    DimensionOverflow(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFiniteEntries,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("observable is not Hermitian: imaginary part of expectation is {0:.3e}")]
    NonHermitianExpectation(f64),

    #[error("Bessel order {0} outside the supported range |m| <= 64")]
    BesselOrder(i32),

    #[error("Bessel argument {0} outside the supported range |mu| <= 10")]
    BesselArgument(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("modulation index mu = {mu} outside the monotone range [0, {limit})")]
    ModulationIndex { mu: f64, limit: f64 },

    #[error("target coupling {target:.6} rad/us is unreachable (maximum {max:.6} rad/us)")]
    Unreachable { target: f64, max: f64 },

    #[error("bisection did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("truncation tail {tail:.3e} exceeds {limit:.0e}; increase n_max")]
    Truncation { tail: f64, limit: f64 },

    #[error("state became non-finite at t = {0} us; reduce the step size")]
    NonFinite(f64),

    #[error("steady state is not unique: Liouvillian null space has dimension {}", .0.len())]
    DegenerateSteadyState(Vec<Operator>),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("time grid must be non-empty, finite and strictly increasing")]
    TimeGrid,

    #[error("found {found} extrema, need at least {needed}")]
    TooFewExtrema { found: usize, needed: usize },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("infeasible fit: {0}")]
    Infeasible(String),
}
