use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("velocity norm {norm:e} is below the singular-cone radius {y_min:e}")]
    SingularVelocity { norm: f64, y_min: f64 },

    #[error("metric is singular (estimated condition number {cond:e})")]
    SingularMetric { cond: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state left the chart domain: {0}")]
    DomainExit(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sample index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("integration aborted at t = {t}: {source}")]
    Aborted { t: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Error {
        match self {
            e @ Error::Aborted { .. } => e,
            e => Error::Aborted {
                t,
                source: Box::new(e),
            },
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
