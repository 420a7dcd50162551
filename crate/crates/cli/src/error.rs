use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        })
    }
}

impl From<sparsepoly::Error> for CliError {
    fn from(e: sparsepoly::Error) -> Self {
        use sparsepoly::Error as E;
        match e {
            E::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            E::Io(io) => CliError::Io(io),
            E::InvalidArgument(_) | E::InvalidWeights(_) | E::InvalidIndexSet(_) | E::UnsupportedFamily(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(format!("serialization: {e}"))
    }
}
