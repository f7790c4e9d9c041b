//! Episode summarization: the four pinned prompt styles and the summary
//! model call.
//!
//! Documents are fed whole; oversized inputs surface the backend's
//! prompt-too-long error rather than being silently truncated or chunked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelClient, ModelError, Role};
use crate::prompts;

#[derive(Debug, Error)]
pub enum SummarizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot summarize an empty document")]
    EmptyDocument,
    #[error("model produced an empty summary")]
    EmptySummary,
}

/// Which pinned summarization prompt to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryStyle {
    /// Screenplay documents with `Caption:` lines.
    ScreenplayHandcrafted,
    /// Caption-heavy documents without named caption lines.
    Vlog,
    /// End-to-end video+transcript prompting.
    VlmVideo,
    /// Plain transcript summarization with no visual steering.
    Simple,
}

impl SummaryStyle {
    pub fn template(self) -> &'static str {
        match self {
            SummaryStyle::ScreenplayHandcrafted => prompts::SUMMARY_SCREENPLAY_TEMPLATE,
            SummaryStyle::Vlog => prompts::SUMMARY_VLOG_TEMPLATE,
            SummaryStyle::VlmVideo => prompts::SUMMARY_VLM_VIDEO_TEMPLATE,
            SummaryStyle::Simple => prompts::SUMMARY_SIMPLE_TEMPLATE,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SummaryStyle::ScreenplayHandcrafted => "screenplay_handcrafted",
            SummaryStyle::Vlog => "vlog",
            SummaryStyle::VlmVideo => "vlm_video",
            SummaryStyle::Simple => "simple",
        }
    }
}

impl fmt::Display for SummaryStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SummaryStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "screenplay_handcrafted" => Ok(SummaryStyle::ScreenplayHandcrafted),
            "vlog" => Ok(SummaryStyle::Vlog),
            "vlm_video" => Ok(SummaryStyle::VlmVideo),
            "simple" => Ok(SummaryStyle::Simple),
            other => Err(format!(
                "unknown summary style `{other}` (expected screenplay_handcrafted, vlog, vlm_video or simple)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episode_id: String,
    pub style: SummaryStyle,
    pub text: String,
    pub word_count: usize,
    /// Model that produced the text, for the artifact audit trail.
    pub model_id: String,
}

/// Document followed by the style's instruction template.
pub fn build_summary_prompt(document_text: &str, style: SummaryStyle) -> String {
    format!("{document_text}\n\n{}", style.template())
}

/// Number of maximal non-whitespace runs.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Summarize a document with a single model call.
pub fn summarize(
    client: &ModelClient,
    episode_id: &str,
    document_text: &str,
    style: SummaryStyle,
) -> Result<Summary, SummarizeError> {
    if document_text.trim().is_empty() {
        return Err(SummarizeError::EmptyDocument);
    }
    let req = client.request(Role::Summarizer, build_summary_prompt(document_text, style));
    let resp = client.complete(&req)?;
    if resp.text.trim().is_empty() {
        return Err(SummarizeError::EmptySummary);
    }
    Ok(Summary {
        episode_id: episode_id.to_string(),
        style,
        word_count: word_count(&resp.text),
        text: resp.text,
        model_id: client.model_id().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::replay::{Fixture, ReplayBackend};
    use crate::model::ModelClient;

    #[test]
    fn prompt_is_document_then_template() {
        let p = build_summary_prompt("DOC", SummaryStyle::ScreenplayHandcrafted);
        assert!(p.starts_with("DOC\n\nSummarize every single existing subplot"));
        assert!(p.ends_with("that you may find in the Video Captions."));

        let p = build_summary_prompt("DOC", SummaryStyle::Simple);
        assert!(p.ends_with("Your summary should be very complete."));
        assert!(!p.contains("visual detail"));

        let p = build_summary_prompt("DOC", SummaryStyle::Vlog);
        assert!(p.ends_with("scene location."));

        let p = build_summary_prompt("DOC", SummaryStyle::VlmVideo);
        assert!(p.ends_with("video frames and provided images."));
    }

    #[test]
    fn word_count_counts_whitespace_runs() {
        assert_eq!(word_count(""), 0);
        assert_eq!(word_count("a  b\nc"), 3);
        assert_eq!(word_count("  leading and trailing  "), 3);
    }

    fn client_with(fixtures: Vec<Fixture>) -> ModelClient {
        ModelClient::new(Box::new(ReplayBackend::from_fixtures(fixtures)), "summ-model")
    }

    #[test]
    fn summarize_counts_response_words() {
        let probe = client_with(vec![]);
        let req = probe.request(
            Role::Summarizer,
            build_summary_prompt("DOC", SummaryStyle::Simple),
        );
        let client = client_with(vec![Fixture {
            key: req.key(),
            text: "one two three four".into(),
            usage: None,
        }]);
        let s = summarize(&client, "ep", "DOC", SummaryStyle::Simple).unwrap();
        assert_eq!(s.word_count, 4);
        assert_eq!(s.style, SummaryStyle::Simple);
    }

    #[test]
    fn blank_response_is_empty_summary() {
        let probe = client_with(vec![]);
        let req = probe.request(
            Role::Summarizer,
            build_summary_prompt("DOC", SummaryStyle::Simple),
        );
        let client = client_with(vec![Fixture {
            key: req.key(),
            text: "  \n ".into(),
            usage: None,
        }]);
        assert!(matches!(
            summarize(&client, "ep", "DOC", SummaryStyle::Simple),
            Err(SummarizeError::EmptySummary)
        ));
    }

    #[test]
    fn empty_document_is_rejected() {
        let client = client_with(vec![]);
        assert!(matches!(
            summarize(&client, "ep", "  ", SummaryStyle::Simple),
            Err(SummarizeError::EmptyDocument)
        ));
    }

    // Independent word counter: explicit state machine over characters.
    fn oracle_word_count(text: &str) -> usize {
        let mut count = 0;
        let mut in_word = false;
        for c in text.chars() {
            if c.is_whitespace() {
                in_word = false;
            } else if !in_word {
                in_word = true;
                count += 1;
            }
        }
        count
    }

    #[test]
    fn word_count_matches_independent_counter() {
        let fixture: String = (0..601).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        assert_eq!(word_count(&fixture), 601);
        assert_eq!(oracle_word_count(&fixture), 601);
        for text in ["", "one", "  a\tb \n c  ", "x  y", &fixture] {
            assert_eq!(word_count(text), oracle_word_count(text), "{text:?}");
        }
    }

    #[test]
    fn avg_len_is_mean_of_word_counts() {
        let texts = ["a b c", "one two", "just one single line here"];
        let counts: Vec<f64> = texts.iter().map(|t| word_count(t) as f64).collect();
        let oracle: Vec<f64> = texts.iter().map(|t| oracle_word_count(t) as f64).collect();
        let mean = crate::metrics::aggregate(&counts).unwrap();
        assert_eq!(mean, crate::metrics::aggregate(&oracle).unwrap());
        assert_eq!(mean, (3.0 + 2.0 + 5.0) / 3.0);
    }

    #[test]
    fn style_names_round_trip() {
        for style in [
            SummaryStyle::ScreenplayHandcrafted,
            SummaryStyle::Vlog,
            SummaryStyle::VlmVideo,
            SummaryStyle::Simple,
        ] {
            assert_eq!(style.as_str().parse::<SummaryStyle>().unwrap(), style);
        }
        assert!("nope".parse::<SummaryStyle>().is_err());
    }
}
