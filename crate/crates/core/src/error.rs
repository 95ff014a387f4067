use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mgf argument s = {s} outside the domain (bound {bound}, inclusive: {inclusive})")]
    MgfDomain { s: f64, bound: f64, inclusive: bool },

    #[error("inverse mgf requires R > 0, got R = {r}")]
    InvMgfDomain { r: f64 },

    /// Inverse-Gaussian inversion is only valid on the branch `log R <= lambda`.
    #[error("inverse mgf branch violated: R = {r} exceeds exp(lambda) = {max}")]
    InvMgfBranch { r: f64, max: f64 },

    #[error("fraction f = {f} outside the admissible range [0, {max})")]
    FractionOutOfRange { f: f64, max: f64 },

    #[error("invalid clock: {0}")]
    InvalidClock(String),

    #[error("invalid bet: {0}")]
    InvalidBet(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("at f = {f}: {source}")]
    AtFraction { f: f64, source: Box<Error> },

    #[error("calibration did not converge after {iterations} iterations (residuals {residuals:?})")]
    Calibration { iterations: usize, residuals: [f64; 2] },

    #[error("root finder: {0}")]
    Root(String),

    #[error("quadrature did not reach tolerance: estimate {value}, error {error}")]
    Quadrature { value: f64, error: f64 },
}

impl Error {
    /// Configuration and parameter problems, as opposed to numerical or
    /// domain failures during evaluation.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidClock(_)
            | Error::InvalidBet(_)
            | Error::InvalidParameter(_)
            | Error::Config(_) => true,
            Error::AtFraction { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn at(self, f: f64) -> Error {
        match self {
            e @ Error::AtFraction { .. } => e,
            e => Error::AtFraction { f, source: Box::new(e) },
        }
    }
}
