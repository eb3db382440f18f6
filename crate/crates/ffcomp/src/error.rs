use std::path::PathBuf;

use ffcomp_core::metrics::MetricsError;
use ffcomp_core::pca::PcaError;
use ffcomp_core::sim::SimError;
use ffcomp_core::tdnn::TdnnError;
use ffcomp_core::tracking::TrackingError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("run left the path ({distance:.2} m off) at t = {t:.2} s")]
    Diverged { t: f64, distance: f64 },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Tdnn(#[from] TdnnError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Tracking(#[from] TrackingError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => EXIT_CONFIG,
            Error::Sim(SimError::Plant(_) | SimError::Compensator(_) | SimError::PeriodMismatch { .. }) => EXIT_CONFIG,
            Error::Diverged { .. } => EXIT_DIVERGED,
            Error::Stage { source, .. } => source.exit_code(),
            _ => EXIT_FAILURE,
        }
    }
}

/// Tags an error with the pipeline stage that produced it.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e.into()),
        })
    }
}
