use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical parameter violates its domain constraint.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// Adaptive quadrature hit its subdivision cap before reaching the tolerance.
    #[error(
        "quadrature did not converge on [{lower}, {upper}] after {intervals} subintervals \
         (estimated error {estimated_error:.3e}, tolerance {tolerance:.3e})"
    )]
    QuadratureNonConvergence {
        lower: f64,
        upper: f64,
        intervals: usize,
        estimated_error: f64,
        tolerance: f64,
    },

    /// Normalizing by the shot-noise baseline needs |alpha|^2 T > 0.
    #[error("shot-noise baseline |alpha|^2 T / 2 is zero; normalized variance undefined")]
    ZeroBaseline,

    /// Sweep specification problem. `line` is 1-based when the spec came from a file.
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Spec { line: Option<usize>, message: String },

    /// A numeric failure at a particular sweep grid point.
    #[error("at grid point {coordinates}: {source}")]
    AtGridPoint {
        coordinates: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn spec(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Spec {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by user-supplied configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::InvalidParameter { .. } | Error::Spec { .. } => true,
            Error::AtGridPoint { source, .. } => source.is_config_error(),
            Error::QuadratureNonConvergence { .. } | Error::ZeroBaseline => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that `value` is finite and strictly positive.
pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(field, format!("must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn require_unit_interval(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::invalid(field, format!("must lie in [0, 1], got {value}")))
    }
}

pub(crate) fn require_finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(field, format!("must be finite, got {value}")))
    }
}
