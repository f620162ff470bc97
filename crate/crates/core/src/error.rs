use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The variants group into the exit-code classes used by the command line
/// tool, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported system: {0}")]
    UnsupportedSystem(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("insufficient exceedances: found {found}, need at least {needed}")]
    InsufficientExceedances { found: usize, needed: usize },
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("infinite horizon: no collision within flight time {max_flight}")]
    InfiniteHorizon { max_flight: f64 },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 configuration, 3 data, 4 numerical or inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnsupportedSystem(_) | Error::Domain(_) => 2,
            Error::Data(_) | Error::Io(_) => 3,
            Error::Range(_)
            | Error::InsufficientExceedances { .. }
            | Error::InsufficientSamples(_)
            | Error::InfiniteHorizon { .. }
            | Error::Fit(_)
            | Error::Inconclusive(_) => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Config(e.to_string())
    }
}
