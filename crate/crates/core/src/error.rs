use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two series of different truncation order were combined.
    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("singular series: constant term {0} has no inverse")]
    SingularSeries(Complex64),

    #[error("range error: {0}")]
    Range(String),

    #[error("invalid parameter: {0}")]
    Domain(String),

    /// A result violated a physical bound beyond its tolerance. Usually a sign of
    /// truncation problems or parameters outside the supported range.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("degenerate point: {0}")]
    Degenerate(String),

    #[error("undefined bound: {0}")]
    UndefinedBound(String),

    #[error("truncation too small: tail mass {tail:.3e} beyond n_max = {n_max}")]
    Truncation { tail: f64, n_max: usize },

    /// The requested operating point cannot be reached, e.g. a total photon
    /// number below what the squeezed mode alone carries.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Short machine-readable tag used in sweep error cells.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::SingularSeries(_) => "singular_series",
            Error::Range(_) => "range",
            Error::Domain(_) => "domain",
            Error::Consistency(_) => "consistency",
            Error::Degenerate(_) => "degenerate",
            Error::UndefinedBound(_) => "undefined_bound",
            Error::Truncation { .. } => "truncation",
            Error::Infeasible(_) => "infeasible",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
