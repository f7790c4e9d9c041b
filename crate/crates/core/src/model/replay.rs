//! Record/replay backends.
//!
//! A fixture file is JSON-lines, one `{key, text, usage}` object per line,
//! keyed by [`super::request_key`]. Replaying a full pipeline run from a
//! fixture set is byte-deterministic and touches no network.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{estimate_tokens, ModelBackend, ModelError, ModelRequest, ModelResponse, Usage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub key: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

/// Parse a JSON-lines fixture file. Blank lines are ignored; a later entry
/// for the same key wins, so re-recorded files stay usable.
pub fn load_fixtures(path: &Path) -> Result<HashMap<String, Fixture>, ModelError> {
    let raw = fs::read_to_string(path)?;
    let mut fixtures = HashMap::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fixture: Fixture = serde_json::from_str(line).map_err(|e| {
            ModelError::Data(format!(
                "fixture {} line {}: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        fixtures.insert(fixture.key.clone(), fixture);
    }
    Ok(fixtures)
}

/// Serves scripted responses by request key; unknown keys are a hard miss.
pub struct ReplayBackend {
    fixtures: HashMap<String, Fixture>,
}

impl ReplayBackend {
    pub fn from_path(path: &Path) -> Result<Self, ModelError> {
        Ok(Self {
            fixtures: load_fixtures(path)?,
        })
    }

    pub fn from_fixtures(fixtures: impl IntoIterator<Item = Fixture>) -> Self {
        Self {
            fixtures: fixtures.into_iter().map(|f| (f.key.clone(), f)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

impl ModelBackend for ReplayBackend {
    fn complete(&self, req: &ModelRequest) -> Result<ModelResponse, ModelError> {
        let key = req.key();
        let fixture = self
            .fixtures
            .get(&key)
            .ok_or(ModelError::ReplayMiss { key })?;
        let usage = fixture.usage.unwrap_or(Usage {
            input_tokens: estimate_tokens(&req.prompt_text),
            output_tokens: estimate_tokens(&fixture.text),
        });
        Ok(ModelResponse {
            text: fixture.text.clone(),
            usage,
            latency_ms: 0,
        })
    }
}

/// Wraps any backend and appends every response to a fixture file, turning a
/// live run into a replayable one.
pub struct RecordingBackend {
    inner: Box<dyn ModelBackend>,
    path: PathBuf,
    writer: Mutex<fs::File>,
}

impl RecordingBackend {
    pub fn create(inner: Box<dyn ModelBackend>, path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let file = fs::OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            inner,
            path,
            writer: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl ModelBackend for RecordingBackend {
    fn complete(&self, req: &ModelRequest) -> Result<ModelResponse, ModelError> {
        let response = self.inner.complete(req)?;
        let fixture = Fixture {
            key: req.key(),
            text: response.text.clone(),
            usage: Some(response.usage),
        };
        let line = serde_json::to_string(&fixture)
            .map_err(|e| ModelError::Data(format!("fixture serialization: {e}")))?;
        let mut writer = self.writer.lock().expect("recorder lock poisoned");
        writeln!(writer, "{line}")?;
        writer.flush()?;
        Ok(response)
    }
}
