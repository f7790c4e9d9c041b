//! Content-addressed artifact store for pipeline runs.
//!
//! Layout: `runs/<run_id>/<episode_id>/<stage file>` with a per-run
//! `manifest.json` recording every artifact's path and content digest in
//! pipeline order, plus the effective configuration snapshot. Artifacts are
//! write-once: re-putting identical bytes is a no-op, differing bytes under
//! the same key is a conflict. Same-key writers are serialized through an
//! advisory file lock; readers never block.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use fs2::FileExt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("artifact {stage} for episode {episode_id} already exists with different content")]
    VersionConflict { stage: String, episode_id: String },
    #[error("artifact {stage} for episode {episode_id} not found")]
    NotFound { stage: String, episode_id: String },
    #[error("artifact {path} digest mismatch: manifest {expected}, file {actual}")]
    DigestMismatch {
        path: String,
        expected: String,
        actual: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest serialization: {0}")]
    Manifest(#[from] serde_json::Error),
}

/// Pipeline stages in execution order; each owns one artifact file per
/// episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Episode,
    Clips,
    SliceCommands,
    RandomClips,
    Captions,
    Screenplay,
    ScreenplayEvents,
    Summary,
    Facts,
    Judgments,
    Report,
}

impl Stage {
    pub fn file_name(self) -> &'static str {
        match self {
            Stage::Episode => "episode.json",
            Stage::Clips => "clips.json",
            Stage::SliceCommands => "slice_commands.json",
            Stage::RandomClips => "random_clips.json",
            Stage::Captions => "captions.jsonl",
            Stage::Screenplay => "screenplay.txt",
            Stage::ScreenplayEvents => "screenplay_events.json",
            Stage::Summary => "summary.json",
            Stage::Facts => "facts.jsonl",
            Stage::Judgments => "judgments.jsonl",
            Stage::Report => "report.json",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Episode => "episode",
            Stage::Clips => "clips",
            Stage::SliceCommands => "slice_commands",
            Stage::RandomClips => "random_clips",
            Stage::Captions => "captions",
            Stage::Screenplay => "screenplay",
            Stage::ScreenplayEvents => "screenplay_events",
            Stage::Summary => "summary",
            Stage::Facts => "facts",
            Stage::Judgments => "judgments",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageArtifact {
    pub stage: Stage,
    pub path: String,
    pub digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub created_at: String,
    pub config: serde_json::Value,
    /// Stage artifacts per episode, appended in pipeline order.
    pub episodes: BTreeMap<String, Vec<StageArtifact>>,
    /// Per-episode failure messages from the last run.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub failures: BTreeMap<String, String>,
}

/// Artifact store for one run.
pub struct RunStore {
    run_dir: PathBuf,
    manifest: Mutex<RunManifest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunStore {
    /// Open (resuming) or create the store for `run_id` under `runs_root`.
    pub fn open(
        runs_root: &Path,
        run_id: &str,
        config: serde_json::Value,
    ) -> Result<Self, StoreError> {
        let run_dir = runs_root.join(run_id);
        fs::create_dir_all(&run_dir)?;
        let manifest_path = run_dir.join("manifest.json");
        let manifest = if manifest_path.exists() {
            serde_json::from_str(&fs::read_to_string(&manifest_path)?)?
        } else {
            RunManifest {
                run_id: run_id.to_string(),
                created_at: chrono::Utc::now().to_rfc3339(),
                config,
                episodes: BTreeMap::new(),
                failures: BTreeMap::new(),
            }
        };
        Ok(Self {
            run_dir,
            manifest: Mutex::new(manifest),
        })
    }

    pub fn run_dir(&self) -> &Path {
        &self.run_dir
    }

    pub fn manifest_snapshot(&self) -> RunManifest {
        self.manifest.lock().expect("manifest lock poisoned").clone()
    }

    fn artifact_path(&self, stage: Stage, episode_id: &str) -> PathBuf {
        self.run_dir.join(episode_id).join(stage.file_name())
    }

    pub fn has(&self, stage: Stage, episode_id: &str) -> bool {
        let manifest = self.manifest.lock().expect("manifest lock poisoned");
        manifest
            .episodes
            .get(episode_id)
            .is_some_and(|stages| stages.iter().any(|a| a.stage == stage))
    }

    /// Write one artifact. Identical re-puts are no-ops; differing content
    /// under the same key is a [`StoreError::VersionConflict`].
    pub fn put(
        &self,
        stage: Stage,
        episode_id: &str,
        payload: &[u8],
    ) -> Result<(PathBuf, String), StoreError> {
        let path = self.artifact_path(stage, episode_id);
        let dir = path.parent().expect("artifact path has a parent");
        fs::create_dir_all(dir)?;

        let lock_path = dir.join(format!(".{}.lock", stage.file_name()));
        let lock_file = fs::OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)?;
        lock_file.lock_exclusive()?;
        let result = self.put_locked(stage, episode_id, payload, &path);
        let _ = fs2::FileExt::unlock(&lock_file);
        result
    }

    fn put_locked(
        &self,
        stage: Stage,
        episode_id: &str,
        payload: &[u8],
        path: &Path,
    ) -> Result<(PathBuf, String), StoreError> {
        let digest = sha256_hex(payload);
        if path.exists() {
            let existing = fs::read(path)?;
            if existing == payload {
                self.record(stage, episode_id, path, &digest)?;
                return Ok((path.to_path_buf(), digest));
            }
            return Err(StoreError::VersionConflict {
                stage: stage.name().to_string(),
                episode_id: episode_id.to_string(),
            });
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, payload)?;
        fs::rename(&tmp, path)?;
        self.record(stage, episode_id, path, &digest)?;
        Ok((path.to_path_buf(), digest))
    }

    fn record(
        &self,
        stage: Stage,
        episode_id: &str,
        path: &Path,
        digest: &str,
    ) -> Result<(), StoreError> {
        let rel = path
            .strip_prefix(&self.run_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .to_string();
        {
            let mut manifest = self.manifest.lock().expect("manifest lock poisoned");
            let stages = manifest.episodes.entry(episode_id.to_string()).or_default();
            if let Some(existing) = stages.iter_mut().find(|a| a.stage == stage) {
                existing.path = rel;
                existing.digest = digest.to_string();
            } else {
                stages.push(StageArtifact {
                    stage,
                    path: rel,
                    digest: digest.to_string(),
                });
            }
        }
        self.save_manifest()
    }

    /// Read an artifact back, verifying its digest against the manifest.
    pub fn get(&self, stage: Stage, episode_id: &str) -> Result<Vec<u8>, StoreError> {
        let recorded = {
            let manifest = self.manifest.lock().expect("manifest lock poisoned");
            manifest
                .episodes
                .get(episode_id)
                .and_then(|stages| stages.iter().find(|a| a.stage == stage).cloned())
        };
        let artifact = recorded.ok_or_else(|| StoreError::NotFound {
            stage: stage.name().to_string(),
            episode_id: episode_id.to_string(),
        })?;
        let path = self.run_dir.join(&artifact.path);
        let payload = match fs::read(&path) {
            Ok(p) => p,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound {
                    stage: stage.name().to_string(),
                    episode_id: episode_id.to_string(),
                })
            }
            Err(e) => return Err(e.into()),
        };
        let actual = sha256_hex(&payload);
        if actual != artifact.digest {
            return Err(StoreError::DigestMismatch {
                path: path.display().to_string(),
                expected: artifact.digest,
                actual,
            });
        }
        Ok(payload)
    }

    /// Record (or clear with `None`) an episode-level failure message.
    pub fn record_failure(&self, episode_id: &str, message: Option<String>) -> Result<(), StoreError> {
        {
            let mut manifest = self.manifest.lock().expect("manifest lock poisoned");
            match message {
                Some(msg) => {
                    manifest.failures.insert(episode_id.to_string(), msg);
                }
                None => {
                    manifest.failures.remove(episode_id);
                }
            }
        }
        self.save_manifest()
    }

    pub fn save_manifest(&self) -> Result<(), StoreError> {
        let manifest = self.manifest.lock().expect("manifest lock poisoned");
        let body = serde_json::to_string_pretty(&*manifest)?;
        let path = self.run_dir.join("manifest.json");
        let tmp = self.run_dir.join("manifest.json.tmp");
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(dir: &Path) -> RunStore {
        RunStore::open(dir, "run-1", serde_json::json!({"seed": 7})).unwrap()
    }

    #[test]
    fn put_get_round_trips_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        let payload = br#"{"clips":[]}"#;
        let (_, digest) = s.put(Stage::Clips, "ep", payload).unwrap();
        assert_eq!(digest, sha256_hex(payload));
        assert_eq!(s.get(Stage::Clips, "ep").unwrap(), payload);
    }

    #[test]
    fn identical_reput_is_noop_differing_is_conflict() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        let (path_a, dig_a) = s.put(Stage::Captions, "ep", b"same").unwrap();
        let (path_b, dig_b) = s.put(Stage::Captions, "ep", b"same").unwrap();
        assert_eq!(path_a, path_b);
        assert_eq!(dig_a, dig_b);
        assert!(matches!(
            s.put(Stage::Captions, "ep", b"different"),
            Err(StoreError::VersionConflict { .. })
        ));
    }

    #[test]
    fn missing_artifact_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        assert!(matches!(
            s.get(Stage::Report, "ep"),
            Err(StoreError::NotFound { .. })
        ));
        assert!(!s.has(Stage::Report, "ep"));
    }

    #[test]
    fn corruption_is_a_digest_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        let (path, _) = s.put(Stage::Summary, "ep", b"payload").unwrap();
        fs::write(&path, b"tampered").unwrap();
        assert!(matches!(
            s.get(Stage::Summary, "ep"),
            Err(StoreError::DigestMismatch { .. })
        ));
    }

    #[test]
    fn manifest_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let s = store(dir.path());
            s.put(Stage::Episode, "ep", b"x").unwrap();
        }
        let s = RunStore::open(dir.path(), "run-1", serde_json::Value::Null).unwrap();
        assert!(s.has(Stage::Episode, "ep"));
        assert_eq!(s.get(Stage::Episode, "ep").unwrap(), b"x");
        // original config snapshot is kept on resume
        assert_eq!(s.manifest_snapshot().config, serde_json::json!({"seed": 7}));
    }

    #[test]
    fn stages_recorded_in_put_order() {
        let dir = tempfile::tempdir().unwrap();
        let s = store(dir.path());
        s.put(Stage::Episode, "ep", b"a").unwrap();
        s.put(Stage::Clips, "ep", b"b").unwrap();
        s.put(Stage::Report, "ep", b"c").unwrap();
        let manifest = s.manifest_snapshot();
        let stages: Vec<Stage> = manifest.episodes["ep"].iter().map(|a| a.stage).collect();
        assert_eq!(stages, vec![Stage::Episode, Stage::Clips, Stage::Report]);
    }
}
