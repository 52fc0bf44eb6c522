use thiserror::Error;

use crate::tuning::{GainViolation, ParameterViolation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tuning parameters: {}", join(.0))]
    InvalidParameters(Vec<ParameterViolation>),

    #[error("invalid gains: {}", join(.0))]
    InvalidGains(Vec<GainViolation>),

    #[error("gain margin must be a positive finite fraction, got {0}")]
    InvalidMargin(f64),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),

    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },

    #[error("campaign case {case_id} failed: {source}")]
    Case {
        case_id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join<V: std::fmt::Display>(items: &[V]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
