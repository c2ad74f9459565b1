use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("input: {0}")]
    Input(String),
    #[error("records schema: {0}")]
    Schema(String),
    #[error("analysis failed")]
    Analysis(#[from] ecomate_core::error::AnalysisError),
}

impl BenchError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
