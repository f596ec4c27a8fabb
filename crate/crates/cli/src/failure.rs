use std::path::PathBuf;

use thiserror::Error;

/// Everything that ends a command early, grouped by exit status.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(String),

    #[error("solver aborted: {0}")]
    Abort(String),

    #[error("verdict failed: {0}")]
    Verdict(String),

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Output { .. } => 1,
            Failure::Config(_) => 2,
            Failure::Abort(_) => 3,
            Failure::Verdict(_) => 4,
        }
    }

    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Failure::Output {
            path: path.into(),
            source,
        }
    }
}

pub fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

pub fn abort<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Abort(e.to_string())
}
