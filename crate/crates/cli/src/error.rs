use std::io;

use thiserror::Error;
use tnfuse::codes::CodeError;
use tnfuse::distance::DistanceError;
use tnfuse::environment::EnvError;
use tnfuse::search::SearchError;
use tnfuse::tncode::TnError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    TableMiss(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::TableMiss(_) => 4,
            CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<DistanceError> for CliError {
    fn from(e: DistanceError) -> Self {
        match e {
            DistanceError::Budget { .. } => CliError::Budget(e.to_string()),
            DistanceError::NoLogicals => CliError::Other(e.to_string()),
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::TableMiss { .. } => CliError::TableMiss(e.to_string()),
            EnvError::Distance(d) => d.into(),
            EnvError::Config(_) | EnvError::Tables { .. } => CliError::Config(e.to_string()),
            EnvError::NotAllowed(_) | EnvError::Terminated => CliError::Other(e.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Budget(_) => CliError::Budget(e.to_string()),
            SearchError::Distance(d) => d.into(),
            SearchError::Env(env) => env.into(),
        }
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::UnknownSeed(_) => CliError::Config(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<TnError> for CliError {
    fn from(e: TnError) -> Self {
        CliError::Other(e.to_string())
    }
}
