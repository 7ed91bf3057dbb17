use thiserror::Error;

/// Errors raised by the numerical kernels, models and the command-line front-end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Panel doubling hit `max_panels` before the error estimate met `abs_tol`.
    #[error("NonConvergent: quadrature error estimate {estimate:e} above tolerance {abs_tol:e} at {panels} panels")]
    NonConvergent { panels: usize, estimate: f64, abs_tol: f64 },

    #[error("NonFinite: function evaluated to a non-finite value at {at}")]
    NonFinite { at: f64 },

    /// A transfer-matrix element is not representable in `f64`.
    #[error("Overflow: e^(|K|+|C|) with K={k}, C={c} is not representable; rescale the couplings")]
    Overflow { k: f64, c: f64 },

    #[error("InvalidMap: {0}")]
    InvalidMap(String),

    #[error("CapExceeded: chain length {n} exceeds the cap of {cap} sites")]
    CapExceeded { n: usize, cap: usize },

    #[error("DegenerateScan: {0}")]
    DegenerateScan(String),

    #[error("ConventionMismatch: expected {expected} couplings, got {got}")]
    ConventionMismatch { expected: &'static str, got: &'static str },

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),

    #[error("Config: {0}")]
    Config(String),

    #[error("Io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonConvergent { .. } => "NonConvergent",
            Error::NonFinite { .. } => "NonFinite",
            Error::Overflow { .. } => "Overflow",
            Error::InvalidMap(_) => "InvalidMap",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::DegenerateScan(_) => "DegenerateScan",
            Error::ConventionMismatch { .. } => "ConventionMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }

    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidMap(_) | Error::ConventionMismatch { .. } | Error::InvalidParameter(_) | Error::Config(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
