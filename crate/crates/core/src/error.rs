//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while loading data or running an estimator.
#[derive(Debug, Error)]
pub enum Error {
    /// File could not be opened or read.
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A CSV row had the wrong number of fields. `row` is the 1-based data
    /// row index (the header, when present, is not counted).
    #[error("row {row}: found {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    /// A CSV field did not parse as a number. Indices are 1-based.
    #[error("row {row}, column {column} ({name:?}): cannot parse {value:?} as a number")]
    BadField {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    /// A column name was referenced but does not exist in the dataset.
    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    /// Two columns share a name, or a name was listed twice.
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    /// Fewer rows than the operation can work with.
    #[error("too few samples: have {rows}, need at least {min}")]
    TooFewSamples { rows: usize, min: usize },

    /// A parameter failed validation; the message names it.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input contains NaN or infinity where finite values are required.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// The sample carries no usable geometric information
    /// (e.g. every point identical).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Shape disagreement between two inputs (matrix widths, vector lengths).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A model file or JSON payload could not be decoded.
    #[error("cannot decode model: {0}")]
    BadModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
