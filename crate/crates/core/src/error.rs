use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value was rejected. `key` names the offending setting.
    #[error("invalid `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("no online nodes")]
    NoOnlineNodes,

    #[error("non-ergodic chain")]
    NonErgodic,

    #[error("no online candidates possible")]
    NoOnlineCandidates,

    #[error("singular linear system while solving for the stationary distribution")]
    Singular,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
