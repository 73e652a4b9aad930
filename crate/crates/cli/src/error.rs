use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read configuration `{path}`: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}: expected `key = value`, found `{text}`")]
    Syntax {
        origin: String,
        line: usize,
        text: String,
    },
    #[error("{origin}:{line}: unknown key `{key}`")]
    UnknownKey {
        origin: String,
        line: usize,
        key: String,
    },
    #[error("{}: invalid value for `{key}`: {message}", Location(origin, *line))]
    Value {
        origin: String,
        line: Option<usize>,
        key: String,
        message: String,
    },
}

struct Location<'a>(&'a str, Option<usize>);

impl fmt::Display for Location<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.1 {
            Some(line) => write!(f, "{}:{line}", self.0),
            None => f.write_str(self.0),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<platoon_core::Error> for CliError {
    fn from(e: platoon_core::Error) -> Self {
        match e {
            platoon_core::Error::InvalidConfig { key, message } => {
                CliError::Config(ConfigError::Value {
                    origin: "configuration".into(),
                    line: None,
                    key,
                    message,
                })
            }
            platoon_core::Error::Invariant(_) => CliError::Invariant(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}
