use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is off the manifold (distance {distance:.3e})")]
    OffManifold { distance: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("empty cloud")]
    EmptyCloud,

    #[error("chart {chart} has no assigned points")]
    EmptyChart { chart: usize },

    #[error("assignment oracle out of scope: {0}")]
    OracleScope(String),

    #[error("invalid smoothness: {0}")]
    Smoothness(String),

    #[error("parameters do not conform to the architecture: {0}")]
    Conformance(String),

    #[error("invalid level eta = {0}; must lie in (0, 1/2)")]
    Level(f64),

    #[error("sample sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("point {value} lies outside the chart interval [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("search budget exceeded: {needed} > {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("test scope violated: {0}")]
    Scope(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
