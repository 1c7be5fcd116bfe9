use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] chemo_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("configuration is missing `{0}`")]
    Missing(&'static str),
    #[error("{name} = {value} violates {requirement}")]
    Invalid {
        name: String,
        value: f64,
        requirement: String,
    },
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub(crate) fn invalid(name: &str, value: f64, requirement: &str) -> Self {
        CliError::Invalid {
            name: name.to_string(),
            value,
            requirement: requirement.to_string(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
