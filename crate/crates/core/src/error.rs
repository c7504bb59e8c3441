use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("machine speed #{index} is not positive ({value})")]
    NonPositiveSpeed { index: usize, value: f64 },

    #[error("job size #{index} is not positive ({value})")]
    NonPositiveJob { index: usize, value: f64 },

    #[error("{what} #{index} is not a finite number")]
    NonFiniteValue { what: &'static str, index: usize },

    #[error("instance has jobs but no machines")]
    EmptyMachines,

    #[error("instance too large for exhaustive search: {machines} machines x {jobs} jobs (limit {limit})")]
    TooLarge {
        machines: usize,
        jobs: usize,
        limit: usize,
    },

    #[error("expected {expected} interval offsets (one per machine), got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bound has no interior maximum on [{lo}, {hi}]")]
    NoMaximumInRange { lo: f64, hi: f64 },

    #[error("recurrence did not reach its stopping rule within {steps} steps")]
    NonTermination { steps: usize },

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("at least one trial is required")]
    ZeroTrials,

    #[error("invalid instance file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the numeric domain of an operation
    /// rather than by malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::NoMaximumInRange { .. }
                | Error::NonTermination { .. }
                | Error::NumericOverflow(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
