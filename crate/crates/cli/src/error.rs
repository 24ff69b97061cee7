use meanfield_bose::Error;
use serde::Serialize;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    Assertion(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] Error),
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    pub fn reason_code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_error",
            CliError::Assertion(_) => "assertion_failed",
            CliError::Io(_) => "io_error",
            CliError::Core(e) => e.reason_code(),
        }
    }

    /// 2 for failed checks, 3 for resource guards, 4 for bad input, 1 otherwise.
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Config(_) => 4,
            CliError::Assertion(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Assertion(_) => 2,
                Error::Resource { .. } => 3,
                Error::InvalidModel(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::UnreliableLevel { .. } => 4,
                _ => 1,
            },
        };
        ExitCode::from(code)
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorReport {
            error: self.reason_code(),
            message: self.to_string(),
        })
        .expect("error report serializes")
    }
}
