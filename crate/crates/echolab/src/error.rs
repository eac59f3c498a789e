use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("basis mismatch: {0}")]
    Basis(String),
    #[error("dimension {dim} exceeds the guard of {max}")]
    DimGuard { dim: usize, max: usize },
    #[error("displacement of {0} lattice units is not commensurate with the grid")]
    Incommensurate(f64),
    #[error("eigensolver failed to converge")]
    Eigen,
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("series carries no amplitude data")]
    MissingAmplitude,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "E_DOMAIN",
            Error::Basis(_) => "E_BASIS",
            Error::DimGuard { .. } => "E_DIM_GUARD",
            Error::Incommensurate(_) => "E_INCOMMENSURATE",
            Error::Eigen => "E_EIGEN",
            Error::Fit(_) => "E_FIT",
            Error::MissingAmplitude => "E_MISSING_AMPLITUDE",
            Error::Io(_) => "E_IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
