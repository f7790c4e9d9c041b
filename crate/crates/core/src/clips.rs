//! Dialogue-pause clip selection.
//!
//! Clips are seeded by pauses in the dialogue: maximal gaps in the merged
//! speech intervals, including the leading and trailing silence. Pauses
//! shorter than the minimum clip length are extended symmetrically about
//! their midpoint so the silent moment stays centered, clamped to the
//! episode bounds with the deficit shifted to the opposite side. Overlapping
//! (and by default abutting) clips are merged so no frame is captioned
//! twice.
//!
//! Pauses are derived from the complement of the aligned utterance
//! intervals. Externally computed speech intervals (e.g. from an audio VAD)
//! can be substituted through the same [`SpeechInterval`] list.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ingest::Episode;

#[derive(Debug, Error)]
pub enum ClipError {
    #[error("minimum clip length {min_clip_s} s exceeds the episode duration {duration_s} s")]
    ClipLongerThanEpisode { min_clip_s: f64, duration_s: f64 },
    #[error("cannot place {n} disjoint spans totalling {total_s} s inside {duration_s} s")]
    InfeasiblePacking { n: usize, total_s: f64, duration_s: f64 },
    #[error("episode has no video path; cannot build slicer commands")]
    MissingVideoPath,
}

/// A merged interval of detected speech, in seconds from episode start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeechInterval {
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipOrigin {
    Pause,
    Random,
}

/// A video interval selected for captioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipSpan {
    pub start_s: f64,
    pub end_s: f64,
    pub origin: ClipOrigin,
    /// The pause that seeded this clip; for merged clips, the first one.
    pub source_pause: Option<(f64, f64)>,
}

impl ClipSpan {
    pub fn length_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Clip selection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Minimum dialogue gap (seconds) that counts as a pause.
    #[serde(default = "default_pause_threshold")]
    pub pause_threshold_s: f64,
    /// Minimum clip length after extension.
    #[serde(default = "default_min_clip")]
    pub min_clip_s: f64,
    /// Merge abutting clips as well as overlapping ones.
    #[serde(default = "default_merge_touching")]
    pub merge_touching: bool,
}

fn default_pause_threshold() -> f64 {
    3.0
}

fn default_min_clip() -> f64 {
    10.0
}

fn default_merge_touching() -> bool {
    true
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            pause_threshold_s: 3.0,
            min_clip_s: 10.0,
            merge_touching: true,
        }
    }
}

/// Union of all utterance spans, merged into sorted disjoint intervals.
pub fn speech_intervals(ep: &Episode) -> Vec<SpeechInterval> {
    let mut spans: Vec<(f64, f64)> = ep
        .utterances
        .iter()
        .map(|u| (u.start_s, u.end_s.min(ep.duration_s)))
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    merge_spans(&spans, true)
        .into_iter()
        .map(|(start_s, end_s)| SpeechInterval { start_s, end_s })
        .collect()
}

/// Sort and merge externally supplied speech intervals (e.g. from an audio
/// VAD) into the canonical disjoint form used by [`detect_pauses`].
pub fn normalize_speech_intervals(intervals: &[SpeechInterval]) -> Vec<SpeechInterval> {
    let mut spans: Vec<(f64, f64)> = intervals
        .iter()
        .filter(|iv| iv.end_s > iv.start_s)
        .map(|iv| (iv.start_s.max(0.0), iv.end_s))
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    merge_spans(&spans, true)
        .into_iter()
        .map(|(start_s, end_s)| SpeechInterval { start_s, end_s })
        .collect()
}

fn merge_spans(sorted: &[(f64, f64)], merge_touching: bool) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for &(start, end) in sorted {
        match out.last_mut() {
            Some(last) if start < last.1 || (merge_touching && start <= last.1) => {
                last.1 = last.1.max(end);
            }
            _ => out.push((start, end)),
        }
    }
    out
}

/// All maximal speech-free gaps of length at least `threshold_s`, including
/// the leading gap before the first interval and the trailing gap after the
/// last one. Zero-length gaps are never reported.
pub fn detect_pauses(
    intervals: &[SpeechInterval],
    duration_s: f64,
    threshold_s: f64,
) -> Vec<(f64, f64)> {
    let mut pauses = Vec::new();
    let mut cursor = 0.0_f64;
    for iv in intervals {
        let gap_end = iv.start_s.min(duration_s);
        if gap_end - cursor >= threshold_s && gap_end > cursor {
            pauses.push((cursor, gap_end));
        }
        cursor = cursor.max(iv.end_s);
    }
    if duration_s - cursor >= threshold_s && duration_s > cursor {
        pauses.push((cursor, duration_s));
    }
    pauses
}

/// Extend each pause to the minimum clip length and merge the results into
/// sorted, disjoint clips.
pub fn build_clips(
    pauses: &[(f64, f64)],
    duration_s: f64,
    cfg: &SelectionConfig,
) -> Result<Vec<ClipSpan>, ClipError> {
    if cfg.min_clip_s > duration_s {
        return Err(ClipError::ClipLongerThanEpisode {
            min_clip_s: cfg.min_clip_s,
            duration_s,
        });
    }

    let mut extended: Vec<ClipSpan> = pauses
        .iter()
        .map(|&(ps, pe)| {
            // Slack absorbs rounding from a previous extension, keeping
            // build_clips idempotent on its own output.
            let (start_s, end_s) = if pe - ps >= cfg.min_clip_s - LENGTH_SLACK_S {
                (ps, pe)
            } else {
                extend_about_midpoint(ps, pe, cfg.min_clip_s, duration_s)
            };
            ClipSpan {
                start_s,
                end_s,
                origin: ClipOrigin::Pause,
                source_pause: Some((ps, pe)),
            }
        })
        .collect();
    extended.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));

    let mut merged: Vec<ClipSpan> = Vec::with_capacity(extended.len());
    for clip in extended {
        match merged.last_mut() {
            Some(last)
                if clip.start_s < last.end_s
                    || (cfg.merge_touching && clip.start_s <= last.end_s) =>
            {
                last.end_s = last.end_s.max(clip.end_s);
            }
            _ => merged.push(clip),
        }
    }
    Ok(merged)
}

fn extend_about_midpoint(ps: f64, pe: f64, min_len: f64, duration_s: f64) -> (f64, f64) {
    let mid = (ps + pe) / 2.0;
    let mut start = mid - min_len / 2.0;
    let mut end = mid + min_len / 2.0;
    if start < 0.0 {
        start = 0.0;
        end = min_len;
    } else if end > duration_s {
        end = duration_s;
        start = duration_s - min_len;
    }
    (start, end)
}

/// Fraction of the episode covered by the (disjoint) clips.
pub fn coverage(clips: &[ClipSpan], duration_s: f64) -> f64 {
    if duration_s <= 0.0 {
        return 0.0;
    }
    clips.iter().map(ClipSpan::length_s).sum::<f64>() / duration_s
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
const LENGTH_SLACK_S: f64 = 1e-9;

/// Seeded random clip selection matched on clip count and total duration.
///
/// Lengths come from uniform stick-breaking of `total_s` into `n` parts;
/// positions are rejection-sampled until the spans are disjoint. Dense
/// requests can exhaust the attempt budget even though a layout exists
/// (earlier spans fragment the free space), so exhaustion falls back to
/// allocating the free space as random inter-span gaps, which always
/// succeeds for any feasible request; `total_s == duration_s` degenerates to
/// an exact tiling. Deterministic per seed either way.
pub fn random_clips(
    n: usize,
    total_s: f64,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<ClipSpan>, ClipError> {
    if n == 0 || total_s <= 0.0 || total_s > duration_s {
        return Err(ClipError::InfeasiblePacking {
            n,
            total_s,
            duration_s,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths = stick_breaking(&mut rng, n, total_s);

    if total_s < duration_s {
        let mut placed: Vec<(f64, f64)> = Vec::with_capacity(n);
        let mut attempts = 0usize;
        'placement: for len in &lengths {
            loop {
                let start = rng.gen_range(0.0..=(duration_s - len));
                let end = start + len;
                let disjoint = placed.iter().all(|&(s, e)| end <= s || start >= e);
                if disjoint {
                    placed.push((start, end));
                    break;
                }
                attempts += 1;
                if attempts >= MAX_PLACEMENT_ATTEMPTS {
                    break 'placement;
                }
            }
        }
        if placed.len() == n {
            placed.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok(to_random_spans(placed));
        }
    }

    // Gap allocation: distribute the free space over n+1 inter-span gaps and
    // lay the spans out in order. Zero free space is an exact tiling.
    let free = duration_s - total_s;
    let mut cuts: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=free)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut spans = Vec::with_capacity(n);
    let mut cursor = 0.0;
    let mut prev_cut = 0.0;
    for (i, len) in lengths.iter().enumerate() {
        let gap = cuts[i] - prev_cut;
        prev_cut = cuts[i];
        let start = cursor + gap;
        let end = if i + 1 == n {
            (start + len).min(duration_s)
        } else {
            start + len
        };
        spans.push((start, end));
        cursor = end;
    }
    Ok(to_random_spans(spans))
}

fn stick_breaking(rng: &mut ChaCha8Rng, n: usize, total_s: f64) -> Vec<f64> {
    loop {
        let mut cuts: Vec<f64> = (0..n.saturating_sub(1))
            .map(|_| rng.gen_range(0.0..total_s))
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut lengths = Vec::with_capacity(n);
        let mut prev = 0.0;
        for c in &cuts {
            lengths.push(c - prev);
            prev = *c;
        }
        lengths.push(total_s - prev);
        if lengths.iter().all(|l| *l > 0.0) {
            return lengths;
        }
    }
}

fn to_random_spans(spans: Vec<(f64, f64)>) -> Vec<ClipSpan> {
    spans
        .into_iter()
        .map(|(start_s, end_s)| ClipSpan {
            start_s,
            end_s,
            origin: ClipOrigin::Random,
            source_pause: None,
        })
        .collect()
}

/// One prepared invocation of the external media slicer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceCommand {
    pub output_name: String,
    /// Argument vector for an ffmpeg-compatible binary; the slicer itself is
    /// resolved and executed by the caller.
    pub args: Vec<String>,
}

/// Build one slicer argument vector per clip. Nothing is executed here.
pub fn slice_commands(
    clips: &[ClipSpan],
    video_path: Option<&str>,
) -> Result<Vec<SliceCommand>, ClipError> {
    let video = video_path.ok_or(ClipError::MissingVideoPath)?;
    Ok(clips
        .iter()
        .enumerate()
        .map(|(idx, clip)| {
            let output_name = format!(
                "clip_{idx}_{start:.3}_{end:.3}.mp4",
                start = clip.start_s,
                end = clip.end_s
            );
            let args = vec![
                "-y".to_string(),
                "-ss".to_string(),
                format!("{:.3}", clip.start_s),
                "-i".to_string(),
                video.to_string(),
                "-t".to_string(),
                format!("{:.3}", clip.length_s()),
                output_name.clone(),
            ];
            SliceCommand { output_name, args }
        })
        .collect())
}
