use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{}", config_message(*.line, .message))]
    Config { line: Option<usize>, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: kirchhoff_dirac::Error,
    },
}

fn config_message(line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config line {l}: {message}"),
        None => format!("config: {message}"),
    }
}

impl CliError {
    /// 2 for usage and configuration problems, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Engine { .. } => 1,
        }
    }
}

pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for kirchhoff_dirac::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Engine { context: what(), source })
    }
}
