use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Geometry(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Verify(_) => 5,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<squeezeqm::discretize::AssemblyError> for CliError {
    fn from(e: squeezeqm::discretize::AssemblyError) -> Self {
        CliError::Geometry(e.to_string())
    }
}

impl From<squeezeqm::geometry::GeometryError> for CliError {
    fn from(e: squeezeqm::geometry::GeometryError) -> Self {
        CliError::Geometry(e.to_string())
    }
}

impl From<squeezeqm::transform::TransformError> for CliError {
    fn from(e: squeezeqm::transform::TransformError) -> Self {
        CliError::Geometry(e.to_string())
    }
}
