use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] matryoshka_core::Error),

    #[error("{0}")]
    Usage(String),

    /// A check the command performs on its own result failed.
    #[error("{0}")]
    Check(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for a violated numerical contract, 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Check(_) => 3,
            CliError::Io { .. } => 1,
            CliError::Core(_) | CliError::Usage(_) => 2,
        }
    }
}
