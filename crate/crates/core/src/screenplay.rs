//! Screenplay assembly and rendering: clip captions interleaved with the
//! transcript in time order.
//!
//! Rendering is line-oriented: one event per line, `SPEAKER: text` for
//! utterances and `Caption: text` for captions, no scene headers. At equal
//! timestamps a caption precedes the utterance (the caption describes the
//! silence before dialogue resumes).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caption::Caption;
use crate::ingest::{Episode, Utterance};

#[derive(Debug, Error)]
pub enum ScreenplayError {
    #[error("caption clip [{clip_start_s}, {clip_end_s}] lies outside the episode (duration {duration_s} s)")]
    ForeignCaption {
        clip_start_s: f64,
        clip_end_s: f64,
        duration_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Utterance,
    Caption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScreenplayEvent {
    Utterance(Utterance),
    Caption(Caption),
}

impl ScreenplayEvent {
    pub fn at_s(&self) -> f64 {
        match self {
            ScreenplayEvent::Utterance(u) => u.start_s,
            ScreenplayEvent::Caption(c) => c.clip.start_s,
        }
    }

    pub fn kind(&self) -> EventKind {
        match self {
            ScreenplayEvent::Utterance(_) => EventKind::Utterance,
            ScreenplayEvent::Caption(_) => EventKind::Caption,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Screenplay {
    pub episode_id: String,
    pub events: Vec<ScreenplayEvent>,
}

/// Merge captions into the transcript in time order. Both inputs keep their
/// relative order; ties put the caption first.
pub fn assemble(ep: &Episode, captions: &[Caption]) -> Result<Screenplay, ScreenplayError> {
    for c in captions {
        if c.clip.start_s < 0.0 || c.clip.end_s > ep.duration_s {
            return Err(ScreenplayError::ForeignCaption {
                clip_start_s: c.clip.start_s,
                clip_end_s: c.clip.end_s,
                duration_s: ep.duration_s,
            });
        }
    }
    let mut sorted_captions: Vec<&Caption> = captions.iter().collect();
    sorted_captions.sort_by(|a, b| a.clip.start_s.total_cmp(&b.clip.start_s));

    let mut events = Vec::with_capacity(ep.utterances.len() + captions.len());
    let mut utterances = ep.utterances.iter().peekable();
    let mut captions = sorted_captions.into_iter().peekable();
    loop {
        match (captions.peek(), utterances.peek()) {
            (Some(c), Some(u)) => {
                if c.clip.start_s <= u.start_s {
                    events.push(ScreenplayEvent::Caption((*c).clone()));
                    captions.next();
                } else {
                    events.push(ScreenplayEvent::Utterance((*u).clone()));
                    utterances.next();
                }
            }
            (Some(_), None) => {
                events.push(ScreenplayEvent::Caption(captions.next().unwrap().clone()));
            }
            (None, Some(_)) => {
                events.push(ScreenplayEvent::Utterance(utterances.next().unwrap().clone()));
            }
            (None, None) => break,
        }
    }
    Ok(Screenplay {
        episode_id: ep.id.clone(),
        events,
    })
}

/// Render one utterance as its screenplay line.
pub fn utterance_line(u: &Utterance) -> String {
    format!("{}: {}", u.speaker, single_line(&u.text))
}

/// Render one caption as its screenplay line.
pub fn caption_line(c: &Caption) -> String {
    format!("Caption: {}", single_line(&c.text))
}

/// Render the screenplay document: one event per line, nothing else.
pub fn render(sp: &Screenplay) -> String {
    sp.events
        .iter()
        .map(|e| match e {
            ScreenplayEvent::Utterance(u) => utterance_line(u),
            ScreenplayEvent::Caption(c) => caption_line(c),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Render the plain transcript (no captions) with the same line rules.
pub fn render_transcript(ep: &Episode) -> String {
    ep.utterances
        .iter()
        .map(utterance_line)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Collapse any whitespace run containing a line break into a single space,
/// keeping other whitespace untouched. Guarantees one rendered line per
/// event.
fn single_line(text: &str) -> String {
    if !text.contains(['\n', '\r']) {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut ws_run = String::new();
    let mut run_has_break = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            ws_run.push(ch);
            run_has_break |= ch == '\n' || ch == '\r';
        } else {
            if !ws_run.is_empty() {
                if run_has_break {
                    out.push(' ');
                } else {
                    out.push_str(&ws_run);
                }
                ws_run.clear();
                run_has_break = false;
            }
            out.push(ch);
        }
    }
    // Trailing whitespace containing a break is dropped with the break.
    if !ws_run.is_empty() && !run_has_break {
        out.push_str(&ws_run);
    }
    out.trim_start().to_string()
}

/// Audit sidecar: where every rendered line came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStamp {
    pub line: usize,
    pub at_s: f64,
    pub kind: EventKind,
}

pub fn sidecar(sp: &Screenplay) -> Vec<EventStamp> {
    sp.events
        .iter()
        .enumerate()
        .map(|(line, e)| EventStamp {
            line,
            at_s: e.at_s(),
            kind: e.kind(),
        })
        .collect()
}
