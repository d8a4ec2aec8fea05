use hm_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },
    #[error("resource cap: {0}")]
    ResourceCap(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    /// 2 for configuration errors, 3 for resource caps, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Lab(LabError::Config(_) | LabError::DepthCap { .. }) => 2,
            CliError::ResourceCap(_) | CliError::Lab(LabError::ResolutionExceeded { .. }) => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::config("m", "bad").exit_code(), 2);
        assert_eq!(CliError::Lab(LabError::ResolutionExceeded { required_m: 8 }).exit_code(), 3);
        assert_eq!(CliError::Lab(LabError::DepthCap { depth: 5, cap: 4 }).exit_code(), 2);
        assert_eq!(CliError::ResourceCap("big".into()).exit_code(), 3);
        assert_eq!(CliError::Lab(LabError::NotHardy { step: 1 }).exit_code(), 1);
    }
}
