use kernel_lowrank::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    /// Bad arguments, configuration or input files; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// A numerical stage or a verification check failed; exit code 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn from_library(stage: &str, err: Error) -> Self {
        match err {
            Error::Argument(_)
            | Error::HypothesisViolation(_)
            | Error::Io { .. }
            | Error::Parse { .. }
            | Error::DegenerateData(_) => CliError::Usage(format!("{stage}: {err}")),
            Error::NoConvergence { .. } | Error::Capability(_) => {
                CliError::Failure(format!("{stage}: {err}"))
            }
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

pub fn io_error(path: &std::path::Path, err: std::io::Error) -> CliError {
    CliError::Failure(format!("writing {}: {err}", path.display()))
}
