use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input sequence")]
    EmptySequence,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("mix needs at least one operand")]
    MissingOperands,

    #[error("unsupported window length {0} (expected 32, 128 or 512)")]
    UnsupportedWindowLength(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset has {0} windows, at least 4 are required")]
    DatasetTooSmall(usize),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u16, found: u16 },

    #[error("file truncated: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },

    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),

    #[error("invalid class label byte {0}")]
    InvalidLabel(u8),

    #[error("unlabeled window in a labeled dataset")]
    MissingLabel,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("exhaustive search supports at most {max} RISs, got {got}")]
    TooManyRis { max: usize, got: usize },

    #[error("empty sweep grid")]
    EmptyGrid,

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySequence => "empty_sequence",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::MissingOperands => "missing_operands",
            Error::UnsupportedWindowLength(_) => "unsupported_window_length",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DatasetTooSmall(_) => "dataset_too_small",
            Error::EmptyDataset => "empty_dataset",
            Error::BadMagic { .. } => "bad_magic",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::Truncated { .. } => "truncated",
            Error::TrailingBytes(_) => "trailing_bytes",
            Error::InvalidLabel(_) => "invalid_label",
            Error::MissingLabel => "missing_label",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::TooManyRis { .. } => "too_many_ris",
            Error::EmptyGrid => "empty_grid",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
