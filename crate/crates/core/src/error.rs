use crate::model::VehicleId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
    #[error("vehicle {0} is a platoon follower and has no entity view")]
    FollowerHasNoView(VehicleId),
    #[error("vehicle {0} is not available for platoon formation")]
    Unavailable(VehicleId),
    #[error("instance has {searchers} searchers, exhaustive search is limited to {max}")]
    InstanceTooLarge { searchers: usize, max: usize },
    #[error("invalid value for `{key}`: {message}")]
    InvalidConfig { key: String, message: String },
    #[error("simulation invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
