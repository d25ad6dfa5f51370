use std::io;
use std::path::PathBuf;

use readme_ai_core::{BuildReport, Diagnostic};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("empty source reference")]
    Empty,
    #[error("name `{name}` not registered (known names: {known})")]
    UnknownName { name: String, known: String },
    #[error("name `{name}` is already registered to {existing}; use overwrite to replace it")]
    Collision { name: String, existing: String },
    #[error("registry {path}: {source}")]
    RegistryIo { path: PathBuf, source: io::Error },
    #[error("registry {path} is not a JSON object of strings: {source}")]
    RegistryFormat { path: PathBuf, source: serde_json::Error },
    #[error("failed to acquire {url}: {message}")]
    Acquire { url: String, message: String },
    #[error("spec missing: no Readme_AI.json at {}", expected.display())]
    SpecMissing { expected: PathBuf },
    #[error("unsupported source `{0}`: only http, https and file URLs are supported")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SourceError {
    /// Whether the failure is about local configuration or disk rather than
    /// the data source itself.
    pub fn is_local(&self) -> bool {
        matches!(self, SourceError::RegistryIo { .. } | SourceError::RegistryFormat { .. } | SourceError::Io(_))
    }
}

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("no handler registered for type `{tag}` (registered: {})", registered.join(", "))]
    UnregisteredTag { tag: String, registered: Vec<String> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegisterError {
    #[error("type tag must be non-empty")]
    EmptyTag,
    #[error("a handler for `{0}` is already registered; set override to replace it")]
    Exists(String),
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("entry `{key}`: {source}")]
    Dispatch { key: String, source: DispatchError },
    #[error("no entry could be processed")]
    NothingProcessed { report: BuildReport },
}

impl BuildError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            BuildError::NothingProcessed { report } => &report.diagnostics,
            BuildError::Dispatch { .. } => &[],
        }
    }
}
