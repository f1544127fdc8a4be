use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: corrupt file at `{field}`: {reason}")]
    Corrupt {
        path: PathBuf,
        field: String,
        reason: String,
    },
    #[error("{path}: format version {found} is not supported (expected {expected})")]
    Version { path: PathBuf, found: u64, expected: u32 },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
    #[error("manifest lists no completed repetitions")]
    EmptyManifest,
    #[error("{failed} training run(s) failed after retry; partial results in {manifest}")]
    PartialRun { failed: usize, manifest: PathBuf },
    #[error(transparent)]
    Core(#[from] ganlab_core::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    /// Process exit status for the CLI: 1 for bad input, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn corrupt(path: &Path, field: impl Into<String>, reason: impl ToString) -> Self {
        LabError::Corrupt {
            path: path.to_path_buf(),
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

pub(crate) trait IoContext<T> {
    fn at(self, path: &Path) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
