//! Crate-wide error type with CLI exit-code classification.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("manifest parse error at {path}:{line}: {msg}")]
    ManifestParse { path: PathBuf, line: usize, msg: String },

    #[error("missing image file for record {index}: {path}")]
    MissingImage { index: usize, path: PathBuf },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("font error: {0}")]
    Font(String),

    #[error("region {index} ({text:?}): {msg}")]
    Region { index: usize, text: String, msg: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("training diverged: {0}")]
    NonFiniteLoss(String),

    #[error("recognizer accuracy {got:.4} below configured floor {floor:.4}; increase the corpus size or pretraining epochs")]
    AccuracyFloor { got: f64, floor: f64 },

    #[error("codec round-trip PSNR {got:.2} dB below configured floor {floor:.2} dB; increase codec pretraining steps")]
    PsnrFloor { got: f64, floor: f64 },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Exit code for the CLI: 1 for user/input problems, 2 for internal ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ManifestParse { .. }
            | Error::MissingImage { .. }
            | Error::Config(_)
            | Error::InvalidArgument(_)
            | Error::Font(_)
            | Error::Region { .. }
            | Error::Checkpoint(_)
            | Error::Io { .. }
            | Error::Image(_)
            | Error::Json(_) => 1,
            Error::ShapeMismatch(_)
            | Error::NonFiniteLoss(_)
            | Error::AccuracyFloor { .. }
            | Error::PsnrFloor { .. }
            | Error::Evaluation(_)
            | Error::Numerical(_) => 2,
        }
    }
}
