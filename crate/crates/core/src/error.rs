use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("element lies on the small Bruhat cell (|g11| = {g11:e} below {tolerance:e})")]
    BruhatSingular { g11: f64, tolerance: f64 },

    #[error("fundamental-domain reduction did not converge within {steps} generator steps")]
    ReductionDiverged { steps: usize },

    #[error("curve derivative vanishes at s = {s}")]
    DerivativeVanishes { s: f64 },

    #[error("parameter t = 0 makes the unipotent trivial and the block matrix singular")]
    SingularParameter,

    #[error("experiment {experiment}: {source}")]
    Experiment { experiment: String, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
