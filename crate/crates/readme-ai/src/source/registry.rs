use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::SourceError;

/// Serializes persists within the process.
static PERSIST_LOCK: Mutex<()> = Mutex::new(());

/// The persisted `lookup.json` name → URL map.
///
/// Names are stored lowercase, which makes them unique case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    entries: BTreeMap<String, String>,
    storage_path: PathBuf,
}

impl Registry {
    /// Loads the registry, starting empty when the file does not exist yet.
    pub fn load(path: impl Into<PathBuf>) -> Result<Self, SourceError> {
        let storage_path = path.into();
        let entries = match fs::read_to_string(&storage_path) {
            Ok(text) => {
                let raw: BTreeMap<String, String> = serde_json::from_str(&text)
                    .map_err(|source| SourceError::RegistryFormat { path: storage_path.clone(), source })?;
                raw.into_iter().map(|(k, v)| (k.to_lowercase(), v)).collect()
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(source) => return Err(SourceError::RegistryIo { path: storage_path, source }),
        };
        Ok(Registry { entries, storage_path })
    }

    /// Re-reads the backing file, picking up writes from other processes.
    pub fn reload(&mut self) -> Result<(), SourceError> {
        *self = Registry::load(self.storage_path.clone())?;
        Ok(())
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn storage_path(&self) -> &Path {
        &self.storage_path
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries.get(&name.trim().to_lowercase()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `name → url` and persists. Re-registering the same pair is a
    /// no-op; a different URL under an existing name needs `overwrite`.
    pub fn register(&mut self, name: &str, url: &str, overwrite: bool) -> Result<(), SourceError> {
        let name = name.trim().to_lowercase();
        if name.is_empty() {
            return Err(SourceError::Empty);
        }
        match self.entries.get(&name) {
            Some(existing) if existing == url => return Ok(()),
            Some(existing) if !overwrite => {
                return Err(SourceError::Collision { name, existing: existing.clone() });
            }
            _ => {}
        }
        let previous = self.entries.insert(name.clone(), url.to_string());
        if let Err(e) = self.persist() {
            match previous {
                Some(p) => self.entries.insert(name, p),
                None => self.entries.remove(&name),
            };
            return Err(e);
        }
        Ok(())
    }

    /// Write-temp-then-rename in the target directory.
    fn persist(&self) -> Result<(), SourceError> {
        let _guard = PERSIST_LOCK.lock().unwrap_or_else(|e| e.into_inner());
        let io_err = |source| SourceError::RegistryIo { path: self.storage_path.clone(), source };
        let dir = match self.storage_path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&dir).map_err(io_err)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
        let mut text = serde_json::to_string_pretty(&self.entries).expect("string map serializes");
        text.push('\n');
        tmp.write_all(text.as_bytes()).map_err(io_err)?;
        tmp.as_file().sync_all().map_err(io_err)?;
        tmp.persist(&self.storage_path).map_err(|e| io_err(e.error))?;
        Ok(())
    }
}
