use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("site {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} supports at most {max} sites, got {n_sites}")]
    TooLarge {
        what: &'static str,
        n_sites: usize,
        max: usize,
    },

    #[error("boundary pair is not pure (purity {purity:.12}, required >= {required:.12})")]
    PairNotPure { purity: f64, required: f64 },

    #[error("Krylov propagation did not converge: {0}")]
    Convergence(String),

    #[error("numerical contract violated: {0}")]
    Numerical(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors that signal a broken numerical contract rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PairNotPure { .. } | Error::Convergence(_) | Error::Numerical(_)
        )
    }
}
