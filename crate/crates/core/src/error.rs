use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("signal is empty")]
    EmptySignal,

    #[error("signal is silent (all samples zero)")]
    Silence,

    #[error("cannot normalize a silent signal")]
    CannotNormalize,

    #[error("malformed WAV file {path}: {reason}")]
    WavFormat { path: PathBuf, reason: String },

    #[error("unsupported WAV encoding in {path}: {reason}")]
    WavUnsupported { path: PathBuf, reason: String },

    #[error("channel {channel} requested but file has {channels} channel(s)")]
    ChannelOutOfRange { channel: usize, channels: usize },

    #[error("invalid band mapping: {0}")]
    InvalidMapping(String),

    #[error("invalid filter length {0}: must be odd and at least 63")]
    InvalidLength(usize),

    #[error("band index {index} out of range for a {bands}-band filter bank")]
    BandIndex { index: usize, bands: usize },

    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    RateMismatch { expected: u32, actual: u32 },

    #[error("band mapping mismatch: {0}")]
    MappingMismatch(String),

    #[error("reference distance {0} cm is not present in the series")]
    MissingReference(f64),

    #[error("no recording at {0} cm in the series")]
    MissingDistance(f64),

    #[error("duplicate distance {0} cm within one series")]
    DuplicateDistance(f64),

    #[error("1/x law is singular at distance {0} cm (must be > 0)")]
    Singularity(f64),

    #[error("invalid frequency {frequency} Hz for sample rate {sample_rate} Hz")]
    InvalidFrequency { frequency: f64, sample_rate: u32 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("series {series}: {source}")]
    InSeries {
        series: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
