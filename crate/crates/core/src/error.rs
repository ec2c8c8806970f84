use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("invalid boundary family: {0}")]
    InvalidFamily(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("case not covered by the theorems: {0}")]
    CaseNotCovered(String),
    #[error("missing factor data: {0}")]
    MissingFactorData(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("matrix not positive definite (least eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("tolerance unreachable: {0}")]
    Tolerance(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("mesh error: {0}")]
    Mesh(String),
}

impl Error {
    /// True for errors that stem from a singular system or an unreachable tolerance.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_) | Error::NotPositiveDefinite(_) | Error::Tolerance(_) | Error::Accuracy(_) | Error::Mesh(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
