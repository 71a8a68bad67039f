use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} needs {required} items, budget is {budget}")]
    Budget {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("couplings (j = {j_mu}, slope = {slope}) do not define a semiclassical level")]
    NotALevel { j_mu: f64, slope: f64 },

    #[error("branch error: {0}")]
    Branch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("relative deviation undefined at b = {b}: |E0| = {e0:e}")]
    UndefinedPoint { b: f64, e0: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    RootFind { iterations: usize, residual: f64 },

    #[error("grid point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by front ends to map failures onto exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
    Resource,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidSpec(_)
            | Error::Domain(_)
            | Error::NotALevel { .. }
            | Error::Branch(_)
            | Error::Precondition(_) => ErrorClass::Input,
            Error::Budget { .. } => ErrorClass::Resource,
            Error::Eigensolver(_) | Error::UndefinedPoint { .. } | Error::RootFind { .. } => {
                ErrorClass::Numerical
            }
            Error::AtPoint { source, .. } => source.class(),
        }
    }

    pub(crate) fn at(index: usize, err: Error) -> Error {
        Error::AtPoint {
            index,
            source: Box::new(err),
        }
    }
}
