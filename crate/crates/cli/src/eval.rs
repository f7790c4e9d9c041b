//! Evaluation composition: fact metrics, ROUGE and the optional
//! character-identification IoU folded into one report.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use screenwright_core::ingest::{name_key, select_references};
use screenwright_core::mfactsum::evaluate_candidate;
use screenwright_core::metrics::{aggregate, iou_characters, rouge_max};
use screenwright_core::report::{percent2, EvaluationReport, RougeBlock};
use screenwright_core::screenplay::render_transcript;
use screenwright_core::summarize::word_count;
use screenwright_core::{CaptionRecord, Episode, FactEvaluation, ModelClient};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalWhich {
    Facts,
    Rouge,
    All,
}

impl EvalWhich {
    fn wants_facts(self) -> bool {
        matches!(self, EvalWhich::Facts | EvalWhich::All)
    }

    fn wants_rouge(self) -> bool {
        matches!(self, EvalWhich::Rouge | EvalWhich::All)
    }
}

/// Human character annotations for one clip, matched to captions by start
/// time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HumanClipCharacters {
    pub clip_start_s: f64,
    pub clip_end_s: f64,
    pub names: Vec<String>,
}

pub fn load_human_characters(path: &Path) -> Result<Vec<HumanClipCharacters>> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("failed to read {}", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("{} is not valid JSON", path.display()))
}

pub struct EvalInputs<'a> {
    pub episode: &'a Episode,
    pub candidate_text: &'a str,
    pub summary_style: Option<String>,
    pub judge: Option<&'a ModelClient>,
    pub which: EvalWhich,
    pub reference_filter: Option<&'a str>,
    /// Captions with predicted characters, for IoU scoring.
    pub captions: Option<&'a [CaptionRecord]>,
    pub human_characters: Option<&'a [HumanClipCharacters]>,
    /// Strict mode errors where lenient mode records a warning and omits the
    /// affected block (used by the batch pipeline).
    pub strict: bool,
}

pub struct EvalOutput {
    pub report: EvaluationReport,
    pub fact_evaluation: Option<FactEvaluation>,
    pub warnings: Vec<String>,
}

/// Score one candidate summary.
pub fn evaluate_summary(inputs: EvalInputs<'_>) -> Result<EvalOutput> {
    let ep = inputs.episode;
    let mut warnings = Vec::new();
    let mut report = EvaluationReport::new(&ep.id);
    report.summary_style = inputs.summary_style.clone();
    report.avg_len = word_count(inputs.candidate_text) as f64;

    let mut fact_evaluation = None;
    if inputs.which.wants_facts() {
        let refs = select_references(ep, inputs.reference_filter);
        if refs.is_empty() {
            let msg = match inputs.reference_filter {
                Some(f) => format!("episode {}: no `{f}` reference; fact metrics skipped", ep.id),
                None => format!("episode {}: no references; fact metrics skipped", ep.id),
            };
            if inputs.strict {
                bail!(msg);
            }
            warnings.push(msg);
        } else {
            let judge = match inputs.judge {
                Some(j) => j,
                None => bail!("fact metrics requested but no judge backend is configured"),
            };
            if refs.len() > 1 {
                warnings.push(format!(
                    "episode {}: {} matching references; fact metrics use the first",
                    ep.id,
                    refs.len()
                ));
            }
            let transcripts = render_transcript(ep);
            let eval =
                evaluate_candidate(judge, &refs[0].text, &transcripts, inputs.candidate_text)?;
            report = report.with_fact_evaluation(&eval);
            fact_evaluation = Some(eval);
        }
    }

    if inputs.which.wants_rouge() {
        let all_refs: Vec<&str> = ep.references.iter().map(|r| r.text.as_str()).collect();
        if all_refs.is_empty() {
            let msg = format!("episode {}: no references; ROUGE skipped", ep.id);
            if inputs.strict {
                bail!(msg);
            }
            warnings.push(msg);
        } else {
            let triple = rouge_max(inputs.candidate_text, &all_refs)?;
            report.rouge = Some(RougeBlock::from_triple(&triple));
        }
    }

    if let (Some(captions), Some(human)) = (inputs.captions, inputs.human_characters) {
        match mean_clip_iou(captions, human, &mut warnings) {
            Some(score) => report.iou = Some(percent2(score)),
            None => warnings.push("no clips matched the human character annotations".into()),
        }
    }

    Ok(EvalOutput {
        report,
        fact_evaluation,
        warnings,
    })
}

/// Per-clip IoU of predicted vs human character sets, averaged over the
/// episode. Annotations are matched to captions by clip start time (0.5 s
/// tolerance).
fn mean_clip_iou(
    captions: &[CaptionRecord],
    human: &[HumanClipCharacters],
    warnings: &mut Vec<String>,
) -> Option<f64> {
    let mut scores = Vec::new();
    for entry in human {
        let matched = captions
            .iter()
            .find(|c| (c.clip_start_s - entry.clip_start_s).abs() <= 0.5);
        match matched {
            Some(caption) => {
                let human_set: BTreeSet<String> = entry.names.iter().map(|n| name_key(n)).collect();
                scores.push(iou_characters(&caption.characters, &human_set).score);
            }
            None => warnings.push(format!(
                "no caption for annotated clip starting at {:.3} s",
                entry.clip_start_s
            )),
        }
    }
    aggregate(&scores).ok()
}
