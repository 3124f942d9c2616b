use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{operation} is not defined for {control} control")]
    UnsupportedControl {
        operation: &'static str,
        control: &'static str,
    },

    #[error("{operation} is not available for the {spectrum} spectrum")]
    UnsupportedSpectrum {
        operation: &'static str,
        spectrum: &'static str,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    QuadratureNonConvergence { estimate: f64, error_bound: f64 },

    #[error("harmonic k = {harmonic} falls on the spectral cutoff")]
    HarmonicOnCutoff { harmonic: u64 },

    #[error("objective varies by less than 1e-12 across the scanned range")]
    FlatObjective,

    #[error("posterior mass underflowed after an update; the prior range probably excludes the true value")]
    PosteriorUnderflow,

    #[error("{0} lies below -1/e, outside the principal Lambert W branch")]
    LambertDomain(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
