use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("image shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no distinguishable degradation after {attempts} attempts")]
    FilterExhausted { attempts: usize },

    #[error("non-finite logits")]
    NonFiniteLogits,

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("non-finite importance ratio for rollout {index}")]
    NonFiniteRatio { index: usize },

    #[error("input has zero variance")]
    ConstantInput,

    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("malformed PNM file: {0}")]
    Pnm(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
