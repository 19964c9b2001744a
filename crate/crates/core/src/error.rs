use thiserror::Error;

use crate::quantum::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("operation requires {expected} mode, scenario is {found}")]
    ModeMismatch { expected: Mode, found: Mode },

    #[error("unknown pair label `{0}`")]
    UnknownPair(String),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("correlator {name} = {value} lies outside [-1, 1]")]
    CorrelatorOutOfRange { name: &'static str, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid grid step {0} rad: must be finite and in (0, 2pi]")]
    InvalidStep(f64),

    #[error("invalid angle vector: {0}")]
    InvalidAngles(String),

    #[error("invalid tolerance {0}: must be finite and positive")]
    InvalidTolerance(f64),

    #[error("estimate undefined for an empty sample")]
    EmptySample,

    #[error("inconsistent pair targets: {0}")]
    InconsistentTargets(String),

    #[error("invalid hidden-variable model: {0}")]
    InvalidModel(String),

    #[error("model file: {0}")]
    ModelFormat(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
