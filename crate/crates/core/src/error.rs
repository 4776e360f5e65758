use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // series construction
    #[error("xs and ys differ in length ({xs} vs {ys})")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    // statistics
    #[error("series is constant in {axis}; standardized distance is undefined")]
    ConstantSeries { axis: &'static str },
    #[error("a marginal has zero variance on the {size}-point subset")]
    ConstantSubset { size: usize },
    #[error("degenerate subset: no untied pairs in one coordinate")]
    DegenerateSubset,
    #[error("tonsuring {percent}% leaves {survivors} points (need at least {needed})")]
    TooFewSurvivors {
        percent: f64,
        survivors: usize,
        needed: usize,
    },
    #[error("tonsure percent {0} outside [0, 100)")]
    InvalidPercent(f64),
    #[error("octant group b is empty; ratio undefined")]
    DegenerateOctants,
    #[error("g-and-h input {0} exceeds the |z| <= 38 guard")]
    Overflow(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // ingest
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("no such column {column:?} in {}", path.display())]
    NoSuchColumn { path: PathBuf, column: String },
    #[error("no usable values left in {} after cleaning ({dropped} rows dropped)", path.display())]
    EmptyAfterCleaning { path: PathBuf, dropped: usize },
    #[error("non-positive level {value} at position {index}")]
    NonPositiveLevel { index: usize, value: f64 },
    #[error("only {0} aligned observations (need at least 2)")]
    TooFewAligned(usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the input data rather than by a statistic
    /// degenerating on otherwise valid data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::LengthMismatch { .. }
                | Error::TooShort { .. }
                | Error::NonFinite { .. }
                | Error::FileNotFound(_)
                | Error::NoSuchColumn { .. }
                | Error::EmptyAfterCleaning { .. }
                | Error::NonPositiveLevel { .. }
                | Error::TooFewAligned(_)
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
