use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The photon-number tail beyond the truncation point is too heavy.
    #[error("truncation error: tail mass {tail:e} beyond n_max = {n_max} exceeds {tol:e}")]
    Truncation { n_max: usize, tail: f64, tol: f64 },

    /// A conditional probability was requested on an event of probability zero.
    #[error("undefined conditional: {0}")]
    UndefinedConditional(String),

    /// A parameter combination violates a constraint of a theorem or protocol.
    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A party received something it could not parse or did not expect.
    #[error("protocol error: {0}")]
    Protocol(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {p} is not a probability")))
    }
}
