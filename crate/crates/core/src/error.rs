use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("profile has no zero before theta = pi")]
    NoZeroFound,
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergent { what: &'static str, iterations: usize },
    #[error("could not bracket eigenvalue {k}: {reason}")]
    BracketFail { k: usize, reason: String },
    #[error("series evaluation lost precision (condition {condition:.3e})")]
    EvaluationUnstable { condition: f64 },
    #[error("Rayleigh quotient denominator vanishes")]
    ZeroDenominator,
    #[error("eigenvalues {a} and {b} cluster without matching a Jacobi field")]
    AmbiguousCluster { a: f64, b: f64 },
    #[error("even and odd fundamental solutions are numerically dependent (mu = {mu})")]
    DegenerateBasis { mu: f64 },
    #[error("division by boundary eigenvalue {ell_k} outside the resonance set")]
    ResonanceDivision { ell_k: f64 },
    #[error("resonant exponent for mode {mode}: {exponent}")]
    ResonantExponent { mode: String, exponent: f64 },
    #[error("integral to infinity diverges (integrand exponent {exponent})")]
    TailDivergence { exponent: f64 },
    #[error("quadrature error {estimate:.3e} exceeds tolerance")]
    GridTooCoarse { estimate: f64 },
    #[error("missing foliation coefficient")]
    MissingCoefficient,
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config validation failed: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
