use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column {column:?}: cannot parse {value:?} as a finite number")]
    BadNumericCell {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("{path}: row {row}: label value {value:?} is not 0 or 1")]
    NonBinaryLabel {
        path: PathBuf,
        row: usize,
        value: String,
    },

    #[error("{path}: line {line}: prediction {value:?} is not 0 or 1")]
    NonBinaryPrediction {
        path: PathBuf,
        line: usize,
        value: String,
    },

    #[error("{0}")]
    InvalidMatrix(String),

    #[error("expected {expected} rows/values, got {actual} ({context})")]
    LengthMismatch {
        expected: usize,
        actual: usize,
        context: String,
    },

    #[error("feature spaces do not match: {0}")]
    FeatureMismatch(String),

    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },

    #[error("stream has {got} rows, cannot take a window of {want}")]
    StreamTooShort { want: usize, got: usize },

    #[error("all features have zero variance; nothing left to scale")]
    AllFeaturesConstant,

    #[error("feature index {0} is out of range or was dropped by the scaler")]
    UnknownFeature(usize),

    #[error("unknown classification function id {0} (expected 1, 2 or 3)")]
    UnknownFunction(u8),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("empty feature selection for perturbation")]
    EmptyFeatureSet,

    #[error("invalid min-samples-per-leaf: {0}")]
    InvalidMinSamples(String),

    #[error("min_samples_leaf {min} exceeds {n} training rows")]
    MinSamplesExceedsRows { min: usize, n: usize },

    #[error("merged conditions on feature {feature} yield an empty interval ({lo} .. {hi})")]
    EmptyInterval { feature: usize, lo: f64, hi: f64 },

    #[error("unknown table format {0:?} (expected \"csv\" or \"text\")")]
    UnknownFormat(String),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
