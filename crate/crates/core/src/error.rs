use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must lie in (0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("malformed finished-count distribution: {0}")]
    MalformedDistribution(String),

    #[error("slot count {slots} is not a whole number of {delay}-slot frames")]
    PartialFrame { slots: u64, delay: u32 },

    #[error("run needs at least {min} slots, got {slots}")]
    TooFewSlots { slots: u64, min: u64 },

    #[error("internal fault: {0}")]
    Internal(&'static str),
}
