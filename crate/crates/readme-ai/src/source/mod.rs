//! Resolving a user's source reference to a local checkout.

mod git;
mod registry;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use percent_encoding::percent_decode_str;
use readme_ai_core::paths::{normalize_data_path, PathError};
use sha2::{Digest, Sha256};
use url::Url;

use crate::error::SourceError;
use crate::net::Deadline;

pub use registry::Registry;

/// Canonical file name at the data source root. Lookup ignores case.
pub const SPEC_FILE_NAME: &str = "Readme_AI.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Url,
    Name,
}

/// What the user typed: a registered name or a URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRef {
    pub raw: String,
    pub kind: SourceKind,
}

impl SourceRef {
    /// A reference is a URL iff it parses as an absolute http, https or file URL.
    pub fn classify(raw: &str) -> Result<Self, SourceError> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(SourceError::Empty);
        }
        let kind = match Url::parse(raw) {
            Ok(u) if matches!(u.scheme(), "http" | "https" | "file") => SourceKind::Url,
            _ => SourceKind::Name,
        };
        Ok(SourceRef { raw: raw.to_string(), kind })
    }
}

/// Last non-empty path segment, `.git` stripped, lowercased. Falls back to
/// the host for URLs with an empty path.
pub fn derive_name(url: &str) -> Option<String> {
    let parsed = Url::parse(url).ok()?;
    let segment = parsed
        .path_segments()
        .and_then(|mut segs| segs.rfind(|s| !s.is_empty()).map(str::to_string))
        .map(|s| percent_decode_str(&s).decode_utf8_lossy().into_owned());
    let name = match segment {
        Some(s) => s,
        None => parsed.host_str()?.to_string(),
    };
    let name = name.strip_suffix(".git").unwrap_or(&name).to_lowercase();
    (!name.is_empty()).then_some(name)
}

/// Maps a reference to a URL. URLs are registered under their derived name
/// as a side effect, replacing any earlier mapping for that name.
pub fn resolve_source(source: &SourceRef, registry: &mut Registry) -> Result<String, SourceError> {
    match source.kind {
        SourceKind::Url => {
            if let Some(name) = derive_name(&source.raw) {
                registry.register(&name, &source.raw, true)?;
            }
            Ok(source.raw.clone())
        }
        SourceKind::Name => registry.get(&source.raw).map(str::to_string).ok_or_else(|| {
            let known: Vec<&str> = registry.entries().keys().map(String::as_str).collect();
            SourceError::UnknownName {
                name: source.raw.clone(),
                known: if known.is_empty() { "none".into() } else { known.join(", ") },
            }
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acquisition {
    Cloned,
    Updated,
    /// A plain local directory used in place.
    Directory,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkout {
    pub root_path: PathBuf,
    pub origin_url: String,
    pub spec_path: PathBuf,
    pub action: Acquisition,
}

impl Checkout {
    /// Resolves a data path lexically inside `root_path`.
    pub fn resolve(&self, data_path: &str) -> Result<PathBuf, PathError> {
        let rel = normalize_data_path(data_path)?;
        Ok(if rel.is_empty() { self.root_path.clone() } else { self.root_path.join(rel) })
    }

    /// A checkout over an existing directory, for callers that already have one.
    pub fn from_directory(root: impl Into<PathBuf>) -> Result<Self, SourceError> {
        let root_path = root.into();
        let spec_path = find_spec(&root_path)?;
        Ok(Checkout {
            origin_url: Url::from_directory_path(fs::canonicalize(&root_path)?)
                .map(|u| u.to_string())
                .unwrap_or_default(),
            root_path,
            spec_path,
            action: Acquisition::Directory,
        })
    }
}

/// Finds `Readme_AI.json` at the root, ignoring case. An exact-case match
/// wins; otherwise the lexicographically first candidate.
pub fn find_spec(root: &Path) -> Result<PathBuf, SourceError> {
    let exact = root.join(SPEC_FILE_NAME);
    if exact.is_file() {
        return Ok(exact);
    }
    let mut candidates: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(Result::ok)
        .filter(|e| e.file_name().to_str().is_some_and(|n| n.eq_ignore_ascii_case(SPEC_FILE_NAME)))
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    candidates.sort();
    candidates.into_iter().next().ok_or(SourceError::SpecMissing { expected: exact })
}

/// First eight hex digits of the SHA-256 of the URL text.
pub fn url_hash8(url: &str) -> String {
    let digest = Sha256::digest(url.as_bytes());
    digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
}

/// `<cache_dir>/<name>-<hash8(url)>`.
pub fn cache_path_for(url: &str, cache_dir: &Path) -> PathBuf {
    let name: String = derive_name(url)
        .unwrap_or_else(|| "source".into())
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    let name = name.trim_start_matches('.');
    let name = if name.is_empty() { "source" } else { name };
    cache_dir.join(format!("{name}-{}", url_hash8(url)))
}

/// Pluggable acquisition so that non-git sources can be added.
pub trait Acquirer: Send + Sync {
    fn acquire(&self, url: &str, cache_dir: &Path, deadline: Deadline) -> Result<Checkout, SourceError>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GitAcquirer;

fn url_lock(key: &Path) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>> = OnceLock::new();
    let mut map = LOCKS.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(key.to_path_buf()).or_default().clone()
}

impl Acquirer for GitAcquirer {
    fn acquire(&self, url: &str, cache_dir: &Path, deadline: Deadline) -> Result<Checkout, SourceError> {
        let parsed = Url::parse(url).map_err(|_| SourceError::Unsupported(url.to_string()))?;
        match parsed.scheme() {
            "http" | "https" => {}
            "file" => {
                let dir = parsed.to_file_path().map_err(|_| SourceError::Unsupported(url.to_string()))?;
                if !dir.is_dir() {
                    return Err(SourceError::Acquire {
                        url: url.to_string(),
                        message: format!("{} is not a directory", dir.display()),
                    });
                }
                if !git::is_repository(&dir) {
                    let mut checkout = Checkout::from_directory(&dir)?;
                    checkout.origin_url = url.to_string();
                    return Ok(checkout);
                }
            }
            _ => return Err(SourceError::Unsupported(url.to_string())),
        }

        let target = cache_path_for(url, cache_dir);
        let lock = url_lock(&target);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(cache_dir)?;
        let action = if target.join(".git").exists() {
            git::update(url, &target, deadline)?;
            Acquisition::Updated
        } else {
            if target.exists() {
                fs::remove_dir_all(&target)?;
            }
            git::clone(url, &target, deadline)?;
            Acquisition::Cloned
        };
        tracing::info!(url, path = %target.display(), ?action, "repository ready");
        let spec_path = find_spec(&target)?;
        Ok(Checkout { root_path: target, origin_url: url.to_string(), spec_path, action })
    }
}

/// Clones or updates `url` under `cache_dir` and locates its metadata file.
pub fn acquire_repo(url: &str, cache_dir: &Path) -> Result<Checkout, SourceError> {
    GitAcquirer.acquire(url, cache_dir, Deadline::none())
}
