//! Harness failures, split by exit code.
//!
//! The contract: exit 1 for command-line usage mistakes (handled in `main`
//! before any of this runs), exit 2 for anything wrong with the requested
//! configuration or its inputs, exit 3 for failures while a valid run was
//! executing. Setup-stage problems are wrapped into [`CliError::Config`] at
//! the call site; the `From` conversions below are reserved for errors that
//! surface mid-run.

use gridrl_core::error::{AgentError, EnvError, ScenarioError, SimError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The request itself is unusable: bad scenario, bad preset math,
    /// unwritable output directory, incompatible checkpoint, ...
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    /// A valid run failed partway through.
    #[error("{0}")]
    Runtime(String),

    #[error(transparent)]
    Agent(#[from] AgentError),

    #[error(transparent)]
    Env(#[from] EnvError),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> CliError {
        CliError::Runtime(msg.into())
    }

    /// `map_err` adapter attaching a short "what were we doing" note.
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Scenario(_) => 2,
            CliError::Runtime(_)
            | CliError::Agent(_)
            | CliError::Env(_)
            | CliError::Sim(_)
            | CliError::Io { .. } => 3,
        }
    }
}
