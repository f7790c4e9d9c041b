//! On-disk response cache: one JSON file per request key.
//!
//! Writes go through a temp file and an atomic rename, so concurrent readers
//! never observe a partial entry and concurrent writers of the same key
//! settle on one complete file.

use std::fs;
use std::path::{Path, PathBuf};

use super::{ModelError, ModelResponse};

pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self, ModelError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<ModelResponse>, ModelError> {
        let path = self.entry_path(key);
        let raw = match fs::read_to_string(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let resp = serde_json::from_str(&raw)
            .map_err(|e| ModelError::Data(format!("cache entry {}: {e}", path.display())))?;
        Ok(Some(resp))
    }

    pub fn put(&self, key: &str, response: &ModelResponse) -> Result<(), ModelError> {
        let path = self.entry_path(key);
        if path.exists() {
            return Ok(());
        }
        let tmp = self.dir.join(format!(".tmp-{key}-{}", std::process::id()));
        let body = serde_json::to_string(response)
            .map_err(|e| ModelError::Data(format!("cache serialization: {e}")))?;
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
