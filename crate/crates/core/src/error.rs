use thiserror::Error;

/// Errors raised by the scoring, hedging, ingestion and evaluation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("forecast has no bins")]
    EmptySupport,

    #[error("negative probability {value} at bin {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, outside tolerance {tol} of 1")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("{labels} bin labels for {probs} probabilities")]
    LabelMismatch { labels: usize, probs: usize },

    #[error("bin labels are not strictly increasing at position {0}")]
    UnorderedLabels(usize),

    #[error("bin index {index} out of range for {len} bins")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("forecast puts mass on the {d} boundary bins at either end")]
    RegularityViolated { d: usize },

    #[error("forecasts live on different supports ({left} vs {right} bins)")]
    SupportMismatch { left: usize, right: usize },

    #[error("observation {0} does not fall in any bin")]
    OutOfRange(String),

    #[error("unknown target {0:?}")]
    UnknownTarget(String),

    #[error("malformed row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("bin grid mismatch for {target}: {reason}")]
    BinGridMismatch { target: String, reason: String },

    #[error("no forecast for {target} at {week} ({location})")]
    MissingForecast {
        location: String,
        target: String,
        week: String,
    },

    #[error("no truth for {target} at {week} ({location})")]
    MissingTruth {
        location: String,
        target: String,
        week: String,
    },

    #[error("duplicate forecast for {target} at {week} ({location})")]
    DuplicateForecast {
        location: String,
        target: String,
        week: String,
    },

    #[error("score tables differ in shape: {0}")]
    ShapeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
