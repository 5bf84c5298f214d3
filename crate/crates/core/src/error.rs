use std::fmt;

use thiserror::Error;

/// A single problem found while checking an embedding space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The space has no samples.
    Empty,
    /// The space has zero columns.
    ZeroDimension,
    /// `id` appears more than once; `row` is the offending occurrence.
    DuplicateId { id: String, row: usize },
    /// Row `row` has `actual` entries instead of `expected`.
    RaggedRow { row: usize, expected: usize, actual: usize },
    /// Entry at (`row`, `col`) is NaN or infinite.
    NonFinite { row: usize, col: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Empty => write!(f, "space has no samples"),
            Diagnostic::ZeroDimension => write!(f, "space has zero dimensions"),
            Diagnostic::DuplicateId { id, row } => {
                write!(f, "duplicate id `{id}` at row {row}")
            }
            Diagnostic::RaggedRow {
                row,
                expected,
                actual,
            } => write!(f, "row {row} has {actual} entries, expected {expected}"),
            Diagnostic::NonFinite { row, col } => {
                write!(f, "non-finite entry at row {row}, column {col}")
            }
        }
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(Diagnostic::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid embedding space: {}", join_diagnostics(.0))]
    InvalidSpace(Vec<Diagnostic>),

    #[error("degenerate vector: zero norm{}", .id.as_deref().map(|i| format!(" for `{i}`")).unwrap_or_default())]
    DegenerateVector { id: Option<String> },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("insufficient samples: requested {requested}, available {available}")]
    InsufficientSamples { requested: usize, available: usize },

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("anchor index {index} out of range for space with {len} samples")]
    AnchorOutOfRange { index: usize, len: usize },

    #[error("duplicate anchor index {0}")]
    DuplicateAnchor(usize),

    #[error("no frequency entry for id `{0}`")]
    MissingFrequency(String),

    #[error("no shared ids between `{source_name}` and `{target_name}`")]
    EmptySharedSet { source_name: String, target_name: String },

    #[error("id sets differ: `{0}` is not present in both spaces")]
    IdSetMismatch(String),

    #[error("zero variance in input series")]
    ZeroVariance,

    #[error("series too short: need at least {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("singular system: try lambda > 0")]
    SingularSystem,

    #[error("feature mismatch: head trained on {expected}, fed {actual}")]
    FeatureMismatch { expected: String, actual: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn degenerate() -> Self {
        Error::DegenerateVector { id: None }
    }

    pub(crate) fn degenerate_id(id: impl Into<String>) -> Self {
        Error::DegenerateVector {
            id: Some(id.into()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
