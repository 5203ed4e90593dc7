use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },

    #[error("line {line}: duplicate tweet_id `{tweet_id}`")]
    DuplicateTweet { line: usize, tweet_id: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid split fractions: {0}")]
    InvalidFractions(String),

    #[error("pruning to users with {min}..={max} interactions removed every record")]
    OverPruned { min: usize, max: usize },

    #[error("length mismatch: {scores} scores for {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported model format_version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("line {line}: malformed feature line: {message}")]
    FeatureLine { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
