use thiserror::Error;

/// Failure modes shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("point {point:?} is not interior to the {domain} domain")]
    Domain {
        domain: &'static str,
        point: Vec<f64>,
    },

    #[error("angle at the origin is undefined when either point is the origin")]
    UndefinedAngle,

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("no convergence after {iterations} iterations (bracket width {width})")]
    Convergence { iterations: usize, width: f64 },

    #[error("objective is not finite at {at}")]
    Numerics { at: f64 },

    #[error("map has a pole at {point:?}")]
    Pole { point: Vec<f64> },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
