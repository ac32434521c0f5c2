use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gapless mode at q = {q}: quasiparticle energy vanishes")]
    SingularMode { q: f64 },

    #[error("self-consistency did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { residual: f64, iterations: usize },

    #[error("unphysical two-site state: {0}")]
    Physicality(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
