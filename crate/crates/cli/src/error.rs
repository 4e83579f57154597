use thiserror::Error;

/// Everything that ends a command early. Input errors exit with status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] mediatrix::Error),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}
