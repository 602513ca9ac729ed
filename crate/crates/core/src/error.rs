use thiserror::Error;

/// Errors raised by the modeling, diagnostic and ingestion routines.
///
/// Periods and years are reported 1-based, as they appear in the public interfaces.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("incomplete year: {0}")]
    IncompleteYear(String),
    #[error("non-finite value at position {index}")]
    BadValue { index: usize },
    #[error("non-positive value at year {year}, period {period}")]
    NonPositive { year: usize, period: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("zero variance in period {period}")]
    DegenerateVariance { period: usize },
    #[error("singular fit in period {period} at order {order}")]
    SingularFit { period: usize, order: usize },
    #[error("series too short: {0}")]
    TooShort(String),
    #[error("simulation diverged at linear time {t}")]
    Unstable { t: usize },
    #[error("optimizer failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("insufficient lags: max_lag {max_lag} must exceed fitted parameters {fitted}")]
    InsufficientLags { max_lag: usize, fitted: usize },
    #[error("forecast evaluations are not aligned: {0}")]
    MisalignedEvals(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI for its one-line error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::IncompleteYear(_) => "IncompleteYear",
            Error::BadValue { .. } => "BadValue",
            Error::NonPositive { .. } => "NonPositive",
            Error::Parse { .. } => "ParseError",
            Error::DegenerateVariance { .. } => "DegenerateVariance",
            Error::SingularFit { .. } => "SingularFit",
            Error::TooShort(_) => "TooShort",
            Error::Unstable { .. } => "Unstable",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::InsufficientLags { .. } => "InsufficientLags",
            Error::MisalignedEvals(_) => "MisalignedEvals",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
