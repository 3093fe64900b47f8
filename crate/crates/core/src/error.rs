use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("non-finite input `{0}`")]
    NonFinite(&'static str),

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {cells} cells")]
    NotConverged {
        value: f64,
        error: f64,
        cells: usize,
    },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(LabError::NonFinite(name))
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LabError {
    LabError::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
