use thiserror::Error;

/// Errors raised while building or analysing a transition network.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network is disconnected: state {state} ({label}) cannot be reached from state 0")]
    DisconnectedGraph { state: usize, label: String },

    #[error("invalid rate on channel {channel}: {reason}")]
    InvalidRate { channel: usize, reason: String },

    #[error("dangling reference: {0}")]
    DanglingReference(String),

    #[error("duplicate channel between states {from} and {to} via reservoir {reservoir}")]
    DuplicateChannel {
        from: usize,
        to: usize,
        reservoir: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid reservoir {id}: {reason}")]
    InvalidReservoir { id: usize, reason: String },

    #[error("stationary distribution is not unique (elimination stalled at state {state})")]
    SingularBeyondRankOne { state: usize },

    #[error("channel {channel} lacks a `{quantity}` annotation")]
    MissingAnnotation { channel: usize, quantity: String },

    #[error("cycle enumeration exceeded the budget of {cap} cycles")]
    CycleBudgetExceeded { cap: usize },

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("spanning-tree normalization underflowed ({value:e}); rescale the rates")]
    NumericalUnderflow { value: f64 },

    #[error("state {state} ({label}) is absorbing: total exit rate is zero")]
    AbsorbingState { state: usize, label: String },

    #[error("invalid simulation input: {0}")]
    InvalidSimulation(String),

    #[error("bosonic frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("zero-gap bosonic transition {from} <-> {to}")]
    ZeroGapChannel { from: String, to: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("at {param} = {value}: {source}")]
    AtSweepPoint {
        param: String,
        value: f64,
        source: Box<NetworkError>,
    },
}

pub type Result<T, E = NetworkError> = std::result::Result<T, E>;
