//! Episode manifest loading and validation.
//!
//! An episode manifest is a self-contained JSON file bundling the episode id,
//! the media locator, the declared duration, the time-aligned transcript and
//! any reference summaries:
//!
//! ```json
//! {
//!   "id": "ep-001",
//!   "video_path": "episodes/ep-001.mp4",
//!   "duration_s": 1800.0,
//!   "utterances": [{"speaker": "MARA", "text": "Hi.", "start_s": 0.0, "end_s": 1.2}],
//!   "references": [{"source": "soap_central", "text": "Mara greets Ellis."}]
//! }
//! ```
//!
//! Loading validates monotone timestamps, non-empty speaker/text fields and
//! the episode duration. Alignment timestamps are noisy, so utterances that
//! overshoot the duration by at most [`DURATION_OVERSHOOT_TOLERANCE_S`] are
//! clamped; larger overshoots are rejected.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Utterances ending past `duration_s` by at most this many seconds are
/// clamped to the duration instead of rejected.
pub const DURATION_OVERSHOOT_TOLERANCE_S: f64 = 0.5;

/// Gap between consecutive utterances (in seconds) above which
/// [`validate_alignment`] emits a diagnostic.
pub const LARGE_GAP_THRESHOLD_S: f64 = 120.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("missing or null field `{0}`")]
    MissingField(&'static str),
    #[error("utterance {index} starts at {start_s} s, before previous start {prev_start_s} s")]
    NonMonotoneTimestamps {
        index: usize,
        prev_start_s: f64,
        start_s: f64,
    },
    #[error("utterance {index} ends at {end_s} s, more than {DURATION_OVERSHOOT_TOLERANCE_S} s past the episode duration {duration_s} s")]
    DurationExceeded {
        index: usize,
        end_s: f64,
        duration_s: f64,
    },
    #[error("manifest contains no utterances")]
    EmptyTranscript,
    #[error("utterance {index}: {reason}")]
    InvalidUtterance { index: usize, reason: String },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
}

/// One transcript line, time-aligned to the episode video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    /// Display form of the speaker name (trimmed, inner whitespace collapsed).
    pub speaker: String,
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
}

/// A human-written episode summary with its provenance tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    /// Provenance tag, e.g. "soap_central" or "tvmegasite".
    pub source: String,
    pub text: String,
}

/// A validated episode: the canonical in-memory form of a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: String,
    pub video_path: Option<String>,
    pub duration_s: f64,
    pub utterances: Vec<Utterance>,
    pub references: Vec<ReferenceSummary>,
}

/// Trim and collapse internal whitespace runs, preserving case.
pub fn normalize_display(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Case-insensitive comparison key for a character name: the normalized
/// display form, uppercased. Name-set comparisons (character identification
/// scoring) operate on these keys.
pub fn name_key(name: &str) -> String {
    normalize_display(name).to_uppercase()
}

impl Episode {
    /// Distinct speaker name keys appearing in the transcript.
    pub fn speaker_roster(&self) -> BTreeSet<String> {
        self.utterances.iter().map(|u| name_key(&u.speaker)).collect()
    }

    /// Serialize back to the manifest JSON layout.
    pub fn to_manifest_json(&self) -> String {
        // Episode derives Serialize with exactly the manifest field layout.
        serde_json::to_string_pretty(self).expect("episode serialization cannot fail")
    }
}

#[derive(Deserialize)]
struct RawManifest {
    id: Option<String>,
    #[serde(default)]
    video_path: Option<String>,
    duration_s: Option<f64>,
    utterances: Option<Vec<RawUtterance>>,
    #[serde(default)]
    references: Vec<RawReference>,
}

#[derive(Deserialize)]
struct RawUtterance {
    speaker: Option<String>,
    text: Option<String>,
    start_s: Option<f64>,
    end_s: Option<f64>,
}

#[derive(Deserialize)]
struct RawReference {
    source: Option<String>,
    text: Option<String>,
}

/// Load and validate an episode manifest from disk.
pub fn load_episode(manifest_path: &Path) -> Result<Episode, IngestError> {
    let raw = fs::read_to_string(manifest_path).map_err(|source| IngestError::Io {
        path: manifest_path.display().to_string(),
        source,
    })?;
    load_episode_from_str(&raw)
}

/// Load and validate an episode manifest from a JSON string.
pub fn load_episode_from_str(manifest_json: &str) -> Result<Episode, IngestError> {
    let raw: RawManifest = serde_json::from_str(manifest_json)?;

    let id = raw.id.ok_or(IngestError::MissingField("id"))?;
    if id.trim().is_empty() {
        return Err(IngestError::InvalidManifest("`id` is empty".into()));
    }
    let duration_s = raw.duration_s.ok_or(IngestError::MissingField("duration_s"))?;
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(IngestError::InvalidManifest(format!(
            "`duration_s` must be a positive number, got {duration_s}"
        )));
    }
    let raw_utterances = raw.utterances.ok_or(IngestError::MissingField("utterances"))?;
    if raw_utterances.is_empty() {
        return Err(IngestError::EmptyTranscript);
    }

    let mut utterances = Vec::with_capacity(raw_utterances.len());
    let mut prev_start = f64::NEG_INFINITY;
    for (index, u) in raw_utterances.into_iter().enumerate() {
        let speaker = u.speaker.ok_or(IngestError::MissingField("speaker"))?;
        let text = u.text.ok_or(IngestError::MissingField("text"))?;
        let start_s = u.start_s.ok_or(IngestError::MissingField("start_s"))?;
        let mut end_s = u.end_s.ok_or(IngestError::MissingField("end_s"))?;

        let speaker = normalize_display(&speaker);
        let text = text.trim().to_string();
        if speaker.is_empty() {
            return Err(IngestError::InvalidUtterance {
                index,
                reason: "speaker is empty".into(),
            });
        }
        if text.is_empty() {
            return Err(IngestError::InvalidUtterance {
                index,
                reason: "text is empty".into(),
            });
        }
        if !start_s.is_finite() || !end_s.is_finite() || start_s < 0.0 {
            return Err(IngestError::InvalidUtterance {
                index,
                reason: format!("timestamps must be finite and non-negative, got [{start_s}, {end_s}]"),
            });
        }
        if end_s <= start_s {
            return Err(IngestError::InvalidUtterance {
                index,
                reason: format!("end {end_s} s is not after start {start_s} s"),
            });
        }
        if start_s < prev_start {
            return Err(IngestError::NonMonotoneTimestamps {
                index,
                prev_start_s: prev_start,
                start_s,
            });
        }
        prev_start = start_s;

        if end_s > duration_s {
            if end_s - duration_s > DURATION_OVERSHOOT_TOLERANCE_S {
                return Err(IngestError::DurationExceeded {
                    index,
                    end_s,
                    duration_s,
                });
            }
            end_s = duration_s;
            if end_s <= start_s {
                return Err(IngestError::InvalidUtterance {
                    index,
                    reason: format!("starts at {start_s} s, at or past the episode duration {duration_s} s"),
                });
            }
        }

        utterances.push(Utterance {
            speaker,
            text,
            start_s,
            end_s,
        });
    }

    let mut references = Vec::with_capacity(raw.references.len());
    for (index, r) in raw.references.into_iter().enumerate() {
        let source = r.source.ok_or(IngestError::MissingField("source"))?;
        let text = r.text.ok_or(IngestError::MissingField("text"))?;
        if text.trim().is_empty() {
            return Err(IngestError::InvalidManifest(format!(
                "reference {index} has empty text"
            )));
        }
        references.push(ReferenceSummary { source, text });
    }

    Ok(Episode {
        id,
        video_path: raw.video_path,
        duration_s,
        utterances,
        references,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Overlap,
    LargeGap,
}

/// A non-fatal alignment finding; loading never fails on these.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignmentDiagnostic {
    /// Index of the second utterance of the offending pair.
    pub index: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

/// Report overlapping utterances and unusually large inter-utterance gaps.
/// Purely diagnostic: the episode is never mutated.
pub fn validate_alignment(ep: &Episode) -> Vec<AlignmentDiagnostic> {
    let mut diags = Vec::new();
    for (i, pair) in ep.utterances.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        let index = i + 1;
        if next.start_s < prev.end_s {
            diags.push(AlignmentDiagnostic {
                index,
                kind: DiagnosticKind::Overlap,
                message: format!(
                    "utterance {index} starts at {:.3} s before utterance {} ends at {:.3} s",
                    next.start_s, i, prev.end_s
                ),
            });
        } else if next.start_s - prev.end_s > LARGE_GAP_THRESHOLD_S {
            diags.push(AlignmentDiagnostic {
                index,
                kind: DiagnosticKind::LargeGap,
                message: format!(
                    "gap of {:.3} s between utterances {} and {index}",
                    next.start_s - prev.end_s,
                    i
                ),
            });
        }
    }
    diags
}

/// Select reference summaries, optionally restricted to one source tag.
/// An empty result under a filter is legitimate: the caller decides whether
/// to skip the episode for fact-based scoring.
pub fn select_references<'a>(
    ep: &'a Episode,
    source_filter: Option<&str>,
) -> Vec<&'a ReferenceSummary> {
    ep.references
        .iter()
        .filter(|r| source_filter.is_none_or(|f| r.source == f))
        .collect()
}
