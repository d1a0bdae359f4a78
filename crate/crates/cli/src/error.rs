//! CLI failures and their exit codes.

use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SELFCHECK: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] qpc_repeater::Error),

    #[error("self-check failed at `{0}`")]
    SelfCheck(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(qpc_repeater::Error::InvalidParameter { .. })
            | CliError::Model(qpc_repeater::Error::TooLarge { .. }) => EXIT_CONFIG,
            CliError::SelfCheck(_) => EXIT_SELFCHECK,
            _ => EXIT_FAILURE,
        }
    }

    /// Short machine-readable category for the diagnostic record.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_CONFIG => "config",
            EXIT_SELFCHECK => "selfcheck",
            _ => "runtime",
        }
    }
}
