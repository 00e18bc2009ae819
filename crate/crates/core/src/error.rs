use thiserror::Error;

/// Errors raised by the algebra, simulation and thermal-averaging layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected} sites, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    /// A dense construction would exceed the configured dimension cap.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// The caller broke a documented precondition (e.g. complex state with the odd-Y pool).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The linear-mode weight `1 - 2 dbeta <H>` went non-positive.
    #[error(
        "non-positive step weight C = {c} (energy {energy}); linear weight mode cannot continue, \
         switch the weight mode to exponential or exact-norm"
    )]
    NonPositiveWeight { c: f64, energy: f64 },

    /// A numerical breakdown, with a diagnostic dump of the offending quantities.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Failure inside an imaginary-time trajectory, tagged with the step index.
    #[error("imaginary-time step {k}: {source}")]
    AtStep { k: usize, source: Box<Error> },
}

impl Error {
    /// The underlying error with any step tag removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
