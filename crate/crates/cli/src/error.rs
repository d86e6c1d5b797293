use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] wvl_core::Error),
    #[error("spectrum for n = {n} at t = {t}: {source}")]
    Spectrum {
        n: u32,
        t: f64,
        #[source]
        source: wvl_core::Error,
    },
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            Self::Core(e) | Self::Spectrum { source: e, .. } => Some(e),
            _ => None,
        };
        match core {
            Some(wvl_core::Error::Singularity { .. }) => 2,
            Some(wvl_core::Error::Accuracy { .. }) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
