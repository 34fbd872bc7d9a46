use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("unsupported model: {0}")]
    Unsupported(String),
    #[error("Fermi level not in a gap: {0}")]
    Gap(String),
    #[error("contour too close to the spectrum: {0}")]
    Contour(String),
    #[error("grid too coarse, refine {0}")]
    RefineGrid(String),
    #[error("ill-conditioned: {msg}")]
    Conditioning { msg: String, singular_values: Vec<f64> },
    #[error("inconsistent fiber: {0}")]
    InconsistentFiber(String),
    #[error("transfer matrix has spectrum on the unit circle: {0}")]
    SpectralLocalization(String),
    #[error("not converged: {0}")]
    NotConverged(String),
}

impl Error {
    pub(crate) fn conditioning(msg: impl Into<String>, singular_values: Vec<f64>) -> Self {
        Error::Conditioning { msg: msg.into(), singular_values }
    }

    /// True for errors that a caller may cure by refining a grid.
    pub fn is_refinable(&self) -> bool {
        matches!(self, Error::RefineGrid(_))
    }
}
