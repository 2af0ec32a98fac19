use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The observed human action is impossible under every type in the belief support.
    #[error("human action {action} has zero likelihood under every type")]
    ZeroLikelihood { action: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: String, reason: String },

    #[error("plan inference needs a non-empty history")]
    EmptyHistory,

    #[error("reachable belief set exceeded the cap ({count} nodes > {cap})")]
    BeliefExplosion { count: usize, cap: usize },

    #[error("brute-force enumeration too large ({count} leaves > {cap})")]
    TooLarge { count: u128, cap: u128 },

    #[error("environment `{0}` does not support role-swapped execution")]
    RoleSwapUnsupported(String),

    #[error("need at least {needed} demonstrations, got {got}")]
    TooFewDemos { needed: usize, got: usize },

    #[error("cluster {0} has no demonstrations")]
    EmptyCluster(usize),

    #[error("unknown condition `{0}`")]
    BadCondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn params(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParams { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    /// True for errors caused by user-supplied configuration.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownEnvironment(_)
                | Error::InvalidParams { .. }
                | Error::BadCondition(_)
                | Error::Json(_)
                | Error::InvalidModel(_)
                | Error::RoleSwapUnsupported(_)
        )
    }
}
