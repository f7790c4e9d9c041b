//! Clip captioning: prompt assembly, the two-turn captioning protocol, and
//! character extraction from the produced captions.
//!
//! Turn one sends the clip (as request media) with the caption prompt; turn
//! two condenses the long description into a few sentences. The condensed
//! caption is what enters the screenplay and what character names are
//! extracted from.

use std::collections::BTreeSet;

use regex::RegexBuilder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clips::ClipSpan;
use crate::ingest::{Episode, Utterance};
use crate::model::{ModelClient, ModelError, Role};
use crate::prompts;
use crate::screenplay::utterance_line;

/// Dialogue window around a clip used as the captioning transcript excerpt.
pub const DEFAULT_CONTEXT_PAD_S: f64 = 15.0;

#[derive(Debug, Error)]
pub enum CaptionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("model produced an empty condensed caption")]
    EmptyCaption,
}

/// One clip queued for captioning with its dialogue context.
#[derive(Debug, Clone)]
pub struct CaptionJob {
    pub clip: ClipSpan,
    /// Utterances intersecting the padded clip window, in transcript order.
    pub excerpt: Vec<Utterance>,
    pub with_characters: bool,
}

/// A produced clip caption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caption {
    pub clip: ClipSpan,
    /// Condensed caption (second turn): the screenplay line.
    pub text: String,
    /// Full first-turn description, kept for auditing.
    pub raw_text: String,
    /// Normalized name keys of roster characters mentioned in `text`.
    pub characters: BTreeSet<String>,
}

/// One caption artifact line (JSON-lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub episode_id: String,
    pub clip_start_s: f64,
    pub clip_end_s: f64,
    pub text: String,
    pub raw_text: String,
    pub characters: BTreeSet<String>,
}

impl CaptionRecord {
    pub fn from_caption(episode_id: &str, caption: &Caption) -> Self {
        Self {
            episode_id: episode_id.to_string(),
            clip_start_s: caption.clip.start_s,
            clip_end_s: caption.clip.end_s,
            text: caption.text.clone(),
            raw_text: caption.raw_text.clone(),
            characters: caption.characters.clone(),
        }
    }
}

/// Utterances intersecting `[clip.start - pad, clip.end + pad]`, in order.
pub fn transcript_excerpt(ep: &Episode, clip: &ClipSpan, context_pad_s: f64) -> Vec<Utterance> {
    let lo = clip.start_s - context_pad_s;
    let hi = clip.end_s + context_pad_s;
    ep.utterances
        .iter()
        .filter(|u| u.end_s >= lo && u.start_s <= hi)
        .cloned()
        .collect()
}

/// Build the captioning prompt for a job. Jobs with character identification
/// quote the transcript excerpt; without one to quote (or when character
/// identification is off) the plain description prompt is used.
pub fn build_caption_prompt(job: &CaptionJob) -> String {
    if !job.with_characters || job.excerpt.is_empty() {
        return prompts::CAPTION_PLAIN_TEMPLATE.to_string();
    }
    let transcripts = job
        .excerpt
        .iter()
        .map(utterance_line)
        .collect::<Vec<_>>()
        .join("\n");
    prompts::fill(
        prompts::CAPTION_WITH_CHARACTERS_TEMPLATE,
        &[("<CLIP TRANSCRIPTS>", &transcripts)],
    )
}

/// Run the two-turn captioning protocol for one clip.
///
/// `clip_ref` is the media locator attached to the first turn (a sliced clip
/// path, or a synthetic reference when slicing was skipped). `roster` is the
/// episode speaker roster in name-key form.
pub fn caption_clip(
    client: &ModelClient,
    job: &CaptionJob,
    clip_ref: &str,
    roster: &BTreeSet<String>,
) -> Result<Caption, CaptionError> {
    let describe = client.request_with_media(Role::Captioner, build_caption_prompt(job), clip_ref);
    let raw = client.complete(&describe)?;

    let condense_prompt = format!("{}\n\n{}", raw.text, prompts::CONDENSE_INSTRUCTION);
    let condense = client.request(Role::Captioner, condense_prompt);
    let condensed = client.complete(&condense)?;

    let text = condensed.text.trim().to_string();
    if text.is_empty() {
        return Err(CaptionError::EmptyCaption);
    }
    let characters = if job.with_characters {
        extract_characters(&text, roster)
    } else {
        BTreeSet::new()
    };
    Ok(Caption {
        clip: job.clip.clone(),
        text,
        raw_text: raw.text,
        characters,
    })
}

/// Case-insensitive whole-word roster matches in a caption; multi-word names
/// match as phrases. Returns the roster's normalized keys.
pub fn extract_characters(caption_text: &str, roster: &BTreeSet<String>) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    for name in roster {
        let phrase = name
            .split_whitespace()
            .map(regex::escape)
            .collect::<Vec<_>>()
            .join(r"\s+");
        let pattern = format!(r"\b{phrase}\b");
        let re = match RegexBuilder::new(&pattern).case_insensitive(true).build() {
            Ok(re) => re,
            Err(_) => continue,
        };
        if re.is_match(caption_text) {
            found.insert(name.clone());
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clips::ClipOrigin;
    use crate::ingest::load_episode_from_str;
    use crate::model::replay::{Fixture, ReplayBackend};

    fn clip(start_s: f64, end_s: f64) -> ClipSpan {
        ClipSpan {
            start_s,
            end_s,
            origin: ClipOrigin::Pause,
            source_pause: None,
        }
    }

    fn roster(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn episode_with(utts: &[(&str, f64, f64)]) -> Episode {
        let lines: Vec<String> = utts
            .iter()
            .map(|(sp, s, e)| {
                format!(r#"{{"speaker":"{sp}","text":"line","start_s":{s},"end_s":{e}}}"#)
            })
            .collect();
        load_episode_from_str(&format!(
            r#"{{"id":"ep","duration_s":1000,"utterances":[{}],"references":[]}}"#,
            lines.join(",")
        ))
        .unwrap()
    }

    #[test]
    fn excerpt_window_respects_padding() {
        let ep = episode_with(&[("A", 30.0, 40.0), ("B", 40.0, 50.0)]);
        let c = clip(27.0, 37.0);
        let with_pad0: Vec<_> = transcript_excerpt(&ep, &c, 0.0);
        assert_eq!(with_pad0.len(), 1);
        assert_eq!(with_pad0[0].speaker, "A");
        let with_pad15 = transcript_excerpt(&ep, &c, 15.0);
        assert_eq!(with_pad15.len(), 2);
    }

    #[test]
    fn prompt_includes_excerpt_and_character_instruction() {
        let ep = episode_with(&[("MARA", 30.0, 40.0), ("ELLIS", 41.0, 45.0)]);
        let job = CaptionJob {
            clip: clip(27.0, 37.0),
            excerpt: transcript_excerpt(&ep, &clip(27.0, 37.0), 15.0),
            with_characters: true,
        };
        let prompt = build_caption_prompt(&job);
        assert!(prompt.contains("MARA: line"));
        assert!(prompt.contains("ELLIS: line"));
        assert!(prompt.contains("Explicitly state the names of the characters"));
    }

    #[test]
    fn plain_prompt_when_characters_disabled() {
        let job = CaptionJob {
            clip: clip(0.0, 10.0),
            excerpt: vec![],
            with_characters: false,
        };
        assert_eq!(build_caption_prompt(&job), prompts::CAPTION_PLAIN_TEMPLATE);
    }

    #[test]
    fn empty_excerpt_falls_back_to_plain_prompt() {
        let job = CaptionJob {
            clip: clip(0.0, 10.0),
            excerpt: vec![],
            with_characters: true,
        };
        let prompt = build_caption_prompt(&job);
        assert_eq!(prompt, prompts::CAPTION_PLAIN_TEMPLATE);
        assert!(!prompt.contains("Here are the transcripts"));
    }

    fn scripted_client(fixtures: Vec<Fixture>) -> ModelClient {
        ModelClient::new(Box::new(ReplayBackend::from_fixtures(fixtures)), "cap-model")
    }

    #[test]
    fn two_turn_protocol_fills_both_texts() {
        let job = CaptionJob {
            clip: clip(27.0, 37.0),
            excerpt: vec![],
            with_characters: true,
        };
        let probe = scripted_client(vec![]);
        let turn1 = probe.request_with_media(Role::Captioner, build_caption_prompt(&job), "c.mp4");
        let turn2 = probe.request(
            Role::Captioner,
            format!("Noah inserts the CD while Luke watches.\n\n{}", prompts::CONDENSE_INSTRUCTION),
        );
        let client = scripted_client(vec![
            Fixture {
                key: turn1.key(),
                text: "Noah inserts the CD while Luke watches.".into(),
                usage: None,
            },
            Fixture {
                key: turn2.key(),
                text: "Noah inserts the CD while Luke watches.".into(),
                usage: None,
            },
        ]);
        let caption = caption_clip(&client, &job, "c.mp4", &roster(&["NOAH", "LUKE", "JACK"])).unwrap();
        assert_eq!(caption.text, "Noah inserts the CD while Luke watches.");
        assert_eq!(caption.raw_text, "Noah inserts the CD while Luke watches.");
        assert_eq!(caption.characters, roster(&["NOAH", "LUKE"]));
        // exactly two backend calls per job, visible in the ledger
        assert_eq!(client.backend_calls(), 2);
        assert_eq!(client.ledger_snapshot().entries().len(), 2);
    }

    #[test]
    fn blank_condensed_caption_is_an_error() {
        let job = CaptionJob {
            clip: clip(0.0, 10.0),
            excerpt: vec![],
            with_characters: false,
        };
        let probe = scripted_client(vec![]);
        let turn1 = probe.request_with_media(Role::Captioner, build_caption_prompt(&job), "c.mp4");
        let turn2 = probe.request(
            Role::Captioner,
            format!("described\n\n{}", prompts::CONDENSE_INSTRUCTION),
        );
        let client = scripted_client(vec![
            Fixture {
                key: turn1.key(),
                text: "described".into(),
                usage: None,
            },
            Fixture {
                key: turn2.key(),
                text: "   ".into(),
                usage: None,
            },
        ]);
        assert!(matches!(
            caption_clip(&client, &job, "c.mp4", &BTreeSet::new()),
            Err(CaptionError::EmptyCaption)
        ));
    }

    #[test]
    fn character_extraction_is_whole_word_and_case_insensitive() {
        let r = roster(&["NOAH", "LUKE", "JACK"]);
        let found = extract_characters("Noah inserts the CD while Luke watches", &r);
        assert_eq!(found, roster(&["NOAH", "LUKE"]));
        assert!(extract_characters("Lukewarm water", &roster(&["LUKE"])).is_empty());
        assert!(extract_characters("", &r).is_empty());
    }

    #[test]
    fn multi_word_names_match_as_phrases() {
        let r = roster(&["MARA LUND"]);
        assert_eq!(
            extract_characters("mara   lund stands up", &r),
            roster(&["MARA LUND"])
        );
        assert!(extract_characters("mara stands, lund sits", &r).is_empty());
    }

    #[test]
    fn extracted_characters_are_subset_of_roster() {
        let r = roster(&["A", "B"]);
        let found = extract_characters("A B C D", &r);
        assert!(found.is_subset(&r));
    }
}
