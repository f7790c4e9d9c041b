//! Multimodal fact-recall scoring.
//!
//! A reference summary is split into sentences, each sentence is decomposed
//! into atomic facts by a judge model, and every fact is classified Visual
//! or Textual by two independent checks:
//!
//! 1. would an explanation of the transcripts alone contain the fact, and
//! 2. can the fact be deduced from the characters' conversation.
//!
//! A fact is Visual only when *both* checks answer False; in all other
//! cases it is Textual. Each fact is then judged supported-or-not by the
//! candidate summary, giving visual recall (`vis_rec`), textual recall
//! (`text_rec`), their mean (`mfs`, the headline score weighting the two
//! modalities equally), and the unweighted fact recall (`fact_rec`).
//!
//! Facts whose judge answers cannot be parsed are excluded from the counts
//! and surfaced in the audit log; they never default into a class.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelClient, ModelError, Role};
use crate::prompts;

#[derive(Debug, Error)]
pub enum MfactError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no `- ` fact bullets in judge response for sentence: {sentence}")]
    NoFactsParsed { sentence: String },
    #[error("no standalone true/false token in judge answer: {raw_answer}")]
    UnparseableVerdict { raw_answer: String },
    #[error("fact {fact_id} has no support judgment")]
    MissingJudgment { fact_id: usize },
    #[error("fact {fact_id} is unclassified")]
    UnclassifiedFact { fact_id: usize },
    #[error("no classified facts to score")]
    EmptyFactSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactClass {
    Visual,
    Textual,
    Unclassified,
}

/// One atomic claim decomposed from a reference-summary sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub id: usize,
    pub text: String,
    pub sentence_index: usize,
    pub fact_class: FactClass,
}

/// Support verdict for one fact against the candidate summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub fact_id: usize,
    pub supported: bool,
    pub judge_rationale: String,
    pub raw_answer: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactCounts {
    pub visual: usize,
    pub textual: usize,
    pub supported_visual: usize,
    pub supported_textual: usize,
}

/// Recall fractions in [0, 1]. When one class is empty its recall and the
/// class-balanced mean are undefined and reported as `None`; `fact_rec` is
/// still computed over whatever facts exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecallReport {
    pub vis_rec: Option<f64>,
    pub text_rec: Option<f64>,
    pub mfs: Option<f64>,
    pub fact_rec: f64,
    pub counts: FactCounts,
}

/// The class-balanced score: arithmetic mean of the two recalls.
pub fn mfs(vis_rec: f64, text_rec: f64) -> f64 {
    (vis_rec + text_rec) / 2.0
}

/// Split text into sentences at `.`/`!`/`?` followed by whitespace and an
/// uppercase letter or opening quote. Inter-sentence whitespace stays with
/// the preceding sentence, so the concatenation of the pieces is exactly the
/// input; splitter quirks re-partition text but never drop it.
pub fn split_sentences(text: &str) -> Vec<String> {
    const OPENERS: [char; 5] = ['"', '\'', '\u{201C}', '\u{2018}', '`'];
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i].1;
        if c == '.' || c == '!' || c == '?' {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j > i + 1 && j < chars.len() {
                let next = chars[j].1;
                if next.is_uppercase() || OPENERS.contains(&next) {
                    sentences.push(text[start..chars[j].0].to_string());
                    start = chars[j].0;
                    i = j;
                    continue;
                }
            }
        }
        i += 1;
    }
    if start < text.len() {
        sentences.push(text[start..].to_string());
    }
    debug_assert_eq!(sentences.concat(), text);
    sentences
}

/// Decompose one sentence into atomic facts via the few-shot prompt.
/// Response lines starting with `- ` (after trimming) are facts, in order.
pub fn identify_facts(client: &ModelClient, sentence: &str) -> Result<Vec<String>, MfactError> {
    let prompt = prompts::fill(
        prompts::FACT_IDENTIFICATION_TEMPLATE,
        &[("<INPUT FACT>", sentence)],
    );
    let resp = client.complete(&client.request(Role::Judge, prompt))?;
    let facts: Vec<String> = resp
        .text
        .lines()
        .filter_map(|l| l.trim().strip_prefix("- "))
        .map(|f| f.trim().to_string())
        .filter(|f| !f.is_empty())
        .collect();
    if facts.is_empty() {
        return Err(MfactError::NoFactsParsed {
            sentence: sentence.to_string(),
        });
    }
    Ok(facts)
}

static VERDICT_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(true|false)\b").expect("verdict regex is valid"));

/// First standalone (word-bounded) `true`/`false` token wins, case
/// insensitive. Embedded occurrences like "untrue" never match.
pub fn parse_verdict(raw_answer: &str) -> Result<bool, MfactError> {
    match VERDICT_RE.find(raw_answer) {
        Some(m) => Ok(m.as_str().eq_ignore_ascii_case("true")),
        None => Err(MfactError::UnparseableVerdict {
            raw_answer: raw_answer.to_string(),
        }),
    }
}

/// Verdict plus the rationale text following the verdict token.
fn parse_verdict_with_rationale(raw_answer: &str) -> Result<(bool, String), MfactError> {
    let m = VERDICT_RE
        .find(raw_answer)
        .ok_or_else(|| MfactError::UnparseableVerdict {
            raw_answer: raw_answer.to_string(),
        })?;
    let verdict = m.as_str().eq_ignore_ascii_case("true");
    let rationale = raw_answer[m.end()..]
        .trim_start_matches(|c: char| c.is_whitespace() || ".,:;-—".contains(c))
        .trim_end()
        .to_string();
    Ok((verdict, rationale))
}

/// Step one of visual classification: True when an explanation of the
/// transcripts alone would contain the fact.
pub fn judge_transcript_support(
    client: &ModelClient,
    fact_text: &str,
    transcripts_text: &str,
) -> Result<bool, MfactError> {
    let prompt = prompts::fill(
        prompts::FACT_TRANSCRIPT_SUPPORT_TEMPLATE,
        &[("<TRANSCRIPTS>", transcripts_text), ("<INPUT FACT>", fact_text)],
    );
    let resp = client.complete(&client.request(Role::Judge, prompt))?;
    parse_verdict(&resp.text)
}

/// Step two of visual classification: True when the fact can be deduced from
/// the characters' conversation (few-shot labeled prompt).
pub fn judge_deducible_from_conversation(
    client: &ModelClient,
    fact_text: &str,
) -> Result<bool, MfactError> {
    let prompt = prompts::fill(
        prompts::FACT_CONVERSATION_FEWSHOT_TEMPLATE,
        &[("<INPUT FACT>", fact_text)],
    );
    let resp = client.complete(&client.request(Role::Judge, prompt))?;
    parse_verdict(&resp.text)
}

/// Visual only when both checks answered False; Textual otherwise.
pub fn classify_fact(s1: bool, s2: bool) -> FactClass {
    if !s1 && !s2 {
        FactClass::Visual
    } else {
        FactClass::Textual
    }
}

/// Judge whether the candidate summary supports one fact.
pub fn judge_support(
    client: &ModelClient,
    fact: &Fact,
    candidate_summary: &str,
) -> Result<Judgment, MfactError> {
    let prompt = prompts::fill(
        prompts::FACT_SUPPORT_TEMPLATE,
        &[("<TRANSCRIPTS>", candidate_summary), ("<INPUT FACT>", &fact.text)],
    );
    let resp = client.complete(&client.request(Role::Judge, prompt))?;
    let (supported, judge_rationale) = parse_verdict_with_rationale(&resp.text)?;
    Ok(Judgment {
        fact_id: fact.id,
        supported,
        judge_rationale,
        raw_answer: resp.text,
    })
}

/// Fold classified facts and their judgments into the recall report.
pub fn compute_recalls(facts: &[Fact], judgments: &[Judgment]) -> Result<RecallReport, MfactError> {
    let by_id: BTreeMap<usize, bool> = judgments.iter().map(|j| (j.fact_id, j.supported)).collect();
    let mut counts = FactCounts::default();
    for fact in facts {
        let supported = *by_id
            .get(&fact.id)
            .ok_or(MfactError::MissingJudgment { fact_id: fact.id })?;
        match fact.fact_class {
            FactClass::Visual => {
                counts.visual += 1;
                counts.supported_visual += usize::from(supported);
            }
            FactClass::Textual => {
                counts.textual += 1;
                counts.supported_textual += usize::from(supported);
            }
            FactClass::Unclassified => {
                return Err(MfactError::UnclassifiedFact { fact_id: fact.id })
            }
        }
    }
    let total = counts.visual + counts.textual;
    if total == 0 {
        return Err(MfactError::EmptyFactSet);
    }
    let vis_rec = (counts.visual > 0).then(|| counts.supported_visual as f64 / counts.visual as f64);
    let text_rec =
        (counts.textual > 0).then(|| counts.supported_textual as f64 / counts.textual as f64);
    let report_mfs = match (vis_rec, text_rec) {
        (Some(v), Some(t)) => Some(mfs(v, t)),
        _ => None,
    };
    let fact_rec = (counts.supported_visual + counts.supported_textual) as f64 / total as f64;
    Ok(RecallReport {
        vis_rec,
        text_rec,
        mfs: report_mfs,
        fact_rec,
        counts,
    })
}

/// One line of the facts artifact: classification inputs and outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactRecord {
    pub fact_id: usize,
    pub sentence_index: usize,
    pub text: String,
    pub s1: Option<bool>,
    pub s2: Option<bool>,
    pub fact_class: FactClass,
}

/// A judge answer that could not be used, kept for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub stage: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fact_id: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_index: Option<usize>,
    pub detail: String,
}

/// Full fact-evaluation output for one (reference, candidate) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactEvaluation {
    pub records: Vec<FactRecord>,
    pub judgments: Vec<Judgment>,
    pub report: RecallReport,
    pub audit: Vec<AuditEntry>,
}

/// Run the whole metric for one candidate summary: sentence split, fact
/// identification, two-step classification, support judging, recall fold.
///
/// Unusable judge answers (no bullets, unparseable verdicts) exclude the
/// affected sentence or fact from the counts and land in the audit log.
pub fn evaluate_candidate(
    judge: &ModelClient,
    reference_summary: &str,
    transcripts_text: &str,
    candidate_summary: &str,
) -> Result<FactEvaluation, MfactError> {
    let mut audit = Vec::new();
    if candidate_summary.trim().is_empty() {
        audit.push(AuditEntry {
            stage: "input".into(),
            fact_id: None,
            sentence_index: None,
            detail: "candidate summary is empty; support judgments run with empty context".into(),
        });
    }

    let mut records: Vec<FactRecord> = Vec::new();
    for (sentence_index, raw_sentence) in split_sentences(reference_summary).iter().enumerate() {
        let sentence = raw_sentence.trim();
        if sentence.is_empty() {
            continue;
        }
        match identify_facts(judge, sentence) {
            Ok(facts) => {
                for text in facts {
                    records.push(FactRecord {
                        fact_id: records.len(),
                        sentence_index,
                        text,
                        s1: None,
                        s2: None,
                        fact_class: FactClass::Unclassified,
                    });
                }
            }
            Err(MfactError::NoFactsParsed { sentence }) => audit.push(AuditEntry {
                stage: "identify".into(),
                fact_id: None,
                sentence_index: Some(sentence_index),
                detail: format!("no facts parsed; sentence excluded: {sentence}"),
            }),
            Err(other) => return Err(other),
        }
    }

    for record in &mut records {
        match judge_transcript_support(judge, &record.text, transcripts_text) {
            Ok(s1) => record.s1 = Some(s1),
            Err(MfactError::UnparseableVerdict { raw_answer }) => {
                audit.push(AuditEntry {
                    stage: "transcript_support".into(),
                    fact_id: Some(record.fact_id),
                    sentence_index: Some(record.sentence_index),
                    detail: raw_answer,
                });
                continue;
            }
            Err(other) => return Err(other),
        }
        match judge_deducible_from_conversation(judge, &record.text) {
            Ok(s2) => record.s2 = Some(s2),
            Err(MfactError::UnparseableVerdict { raw_answer }) => {
                audit.push(AuditEntry {
                    stage: "conversation".into(),
                    fact_id: Some(record.fact_id),
                    sentence_index: Some(record.sentence_index),
                    detail: raw_answer,
                });
                continue;
            }
            Err(other) => return Err(other),
        }
        if let (Some(s1), Some(s2)) = (record.s1, record.s2) {
            record.fact_class = classify_fact(s1, s2);
        }
    }

    let mut judgments: Vec<Judgment> = Vec::new();
    let mut included: Vec<Fact> = Vec::new();
    for record in &records {
        if record.fact_class == FactClass::Unclassified {
            continue;
        }
        let fact = Fact {
            id: record.fact_id,
            text: record.text.clone(),
            sentence_index: record.sentence_index,
            fact_class: record.fact_class,
        };
        match judge_support(judge, &fact, candidate_summary) {
            Ok(judgment) => {
                judgments.push(judgment);
                included.push(fact);
            }
            Err(MfactError::UnparseableVerdict { raw_answer }) => audit.push(AuditEntry {
                stage: "support".into(),
                fact_id: Some(record.fact_id),
                sentence_index: Some(record.sentence_index),
                detail: raw_answer,
            }),
            Err(other) => return Err(other),
        }
    }

    let report = compute_recalls(&included, &judgments)?;
    Ok(FactEvaluation {
        records,
        judgments,
        report,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::replay::{Fixture, ReplayBackend};
    use crate::model::ModelClient;

    fn replay_client(fixtures: Vec<Fixture>) -> ModelClient {
        ModelClient::new(Box::new(ReplayBackend::from_fixtures(fixtures)), "judge-model")
    }

    fn fixture_for(client: &ModelClient, prompt: String, text: &str) -> Fixture {
        Fixture {
            key: client.request(Role::Judge, prompt).key(),
            text: text.into(),
            usage: None,
        }
    }

    #[test]
    fn splits_plain_sentences() {
        let got = split_sentences("A happened. B happened.");
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].trim(), "A happened.");
        assert_eq!(got[1], "B happened.");
    }

    #[test]
    fn honorific_split_is_a_known_limitation() {
        // "Smith" is uppercase after "Dr.", so the rule splits here.
        let got = split_sentences("Dr. Smith left.");
        assert_eq!(got.len(), 2);
        assert_eq!(got.concat(), "Dr. Smith left.");
    }

    #[test]
    fn unterminated_text_is_one_sentence() {
        assert_eq!(split_sentences("One sentence"), vec!["One sentence"]);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        let got = split_sentences("He waited. then he left.");
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn quote_openers_split() {
        let got = split_sentences("She said it. \"Go home.\"");
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn concatenation_always_reproduces_input() {
        for text in [
            "",
            "plain",
            "A. B! C? d. E.",
            "Ends with spaces.   ",
            "No terminator here and None needed",
            "Multi.  Space. Run.",
        ] {
            assert_eq!(split_sentences(text).concat(), text);
        }
    }

    #[test]
    fn identify_facts_parses_bullets_in_order() {
        let sentence = "Katie went to Al's diner and reacted to a 'Closed' sign on the door.";
        let prompt = prompts::fill(prompts::FACT_IDENTIFICATION_TEMPLATE, &[("<INPUT FACT>", sentence)]);
        let probe = replay_client(vec![]);
        let client = replay_client(vec![fixture_for(
            &probe,
            prompt,
            "- Katie went to Al's diner.\n\n- Katie reacted to a 'Closed' sign on the door.",
        )]);
        let facts = identify_facts(&client, sentence).unwrap();
        assert_eq!(
            facts,
            vec![
                "Katie went to Al's diner.",
                "Katie reacted to a 'Closed' sign on the door."
            ]
        );
    }

    #[test]
    fn single_clause_sentence_is_its_own_fact() {
        let sentence = "Bridget suggests that perhaps Eric can help them";
        let prompt = prompts::fill(prompts::FACT_IDENTIFICATION_TEMPLATE, &[("<INPUT FACT>", sentence)]);
        let probe = replay_client(vec![]);
        let client = replay_client(vec![fixture_for(
            &probe,
            prompt,
            "- Bridget suggests that perhaps Eric can help them",
        )]);
        let facts = identify_facts(&client, sentence).unwrap();
        assert_eq!(facts, vec![sentence]);
    }

    #[test]
    fn prose_without_bullets_is_no_facts_parsed() {
        let sentence = "Something happened.";
        let prompt = prompts::fill(prompts::FACT_IDENTIFICATION_TEMPLATE, &[("<INPUT FACT>", sentence)]);
        let probe = replay_client(vec![]);
        let client = replay_client(vec![fixture_for(
            &probe,
            prompt,
            "The sentence describes a single event with no decomposition.",
        )]);
        assert!(matches!(
            identify_facts(&client, sentence),
            Err(MfactError::NoFactsParsed { .. })
        ));
    }

    #[test]
    fn verdict_parsing_examples() {
        assert!(parse_verdict("TRUE, because of the dialogue").unwrap());
        assert!(!parse_verdict("I think false.").unwrap());
        assert!(matches!(
            parse_verdict("untrue"),
            Err(MfactError::UnparseableVerdict { .. })
        ));
        assert!(matches!(
            parse_verdict("Maybe."),
            Err(MfactError::UnparseableVerdict { .. })
        ));
        // first standalone token wins
        assert!(!parse_verdict("False, not true at all").unwrap());
    }

    #[test]
    fn transcript_support_round_trip() {
        let transcripts = "MARA: I sold the house.";
        let fact = "Mara sold the house.";
        let prompt = prompts::fill(
            prompts::FACT_TRANSCRIPT_SUPPORT_TEMPLATE,
            &[("<TRANSCRIPTS>", transcripts), ("<INPUT FACT>", fact)],
        );
        let probe = replay_client(vec![]);
        let client = replay_client(vec![fixture_for(
            &probe,
            prompt,
            "True. The characters discuss it.",
        )]);
        assert!(judge_transcript_support(&client, fact, transcripts).unwrap());
    }

    #[test]
    fn conversation_fewshot_round_trip() {
        let fact = "Simon ushered Lily in.";
        let prompt = prompts::fill(prompts::FACT_CONVERSATION_FEWSHOT_TEMPLATE, &[("<INPUT FACT>", fact)]);
        let probe = replay_client(vec![]);
        let client = replay_client(vec![fixture_for(&probe, prompt, "False")]);
        assert!(!judge_deducible_from_conversation(&client, fact).unwrap());
    }

    #[test]
    fn classification_truth_table() {
        assert_eq!(classify_fact(false, false), FactClass::Visual);
        assert_eq!(classify_fact(false, true), FactClass::Textual);
        assert_eq!(classify_fact(true, false), FactClass::Textual);
        assert_eq!(classify_fact(true, true), FactClass::Textual);
    }

    #[test]
    fn support_judgment_carries_rationale() {
        let fact = Fact {
            id: 3,
            text: "Mara left.".into(),
            sentence_index: 0,
            fact_class: FactClass::Textual,
        };
        let prompt = prompts::fill(
            prompts::FACT_SUPPORT_TEMPLATE,
            &[("<TRANSCRIPTS>", "Mara left for Paris."), ("<INPUT FACT>", "Mara left.")],
        );
        let probe = replay_client(vec![]);
        let client = replay_client(vec![fixture_for(
            &probe,
            prompt,
            "True. The summary states it explicitly.",
        )]);
        let j = judge_support(&client, &fact, "Mara left for Paris.").unwrap();
        assert!(j.supported);
        assert_eq!(j.fact_id, 3);
        assert_eq!(j.judge_rationale, "The summary states it explicitly.");
        assert_eq!(j.raw_answer, "True. The summary states it explicitly.");
    }

    fn fact(id: usize, class: FactClass) -> Fact {
        Fact {
            id,
            text: format!("fact {id}"),
            sentence_index: 0,
            fact_class: class,
        }
    }

    fn judgment(fact_id: usize, supported: bool) -> Judgment {
        Judgment {
            fact_id,
            supported,
            judge_rationale: String::new(),
            raw_answer: String::new(),
        }
    }

    #[test]
    fn recalls_match_hand_counts() {
        // V=3 with 2 supported, T=5 with 4 supported.
        let facts: Vec<Fact> = (0..3)
            .map(|i| fact(i, FactClass::Visual))
            .chain((3..8).map(|i| fact(i, FactClass::Textual)))
            .collect();
        let judgments: Vec<Judgment> = (0..8)
            .map(|i| judgment(i, !matches!(i, 2 | 7)))
            .collect();
        let report = compute_recalls(&facts, &judgments).unwrap();
        assert!((report.vis_rec.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.text_rec.unwrap() - 0.8).abs() < 1e-12);
        assert!((report.mfs.unwrap() - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-12);
        assert!((report.fact_rec - 0.75).abs() < 1e-12);
        assert_eq!(report.counts.visual, 3);
        assert_eq!(report.counts.supported_textual, 4);
    }

    #[test]
    fn mfs_is_exact_mean() {
        assert_eq!(mfs(33.04, 45.12), (33.04 + 45.12) / 2.0);
        assert!((mfs(33.04, 45.12) - 39.08).abs() < 0.01);
        assert!((mfs(24.43, 35.45) - 29.94).abs() < 0.01);
    }

    #[test]
    fn empty_class_reports_undefined_but_keeps_fact_rec() {
        let facts = vec![fact(0, FactClass::Textual), fact(1, FactClass::Textual)];
        let judgments = vec![judgment(0, true), judgment(1, false)];
        let report = compute_recalls(&facts, &judgments).unwrap();
        assert!(report.vis_rec.is_none());
        assert!(report.mfs.is_none());
        assert_eq!(report.text_rec, Some(0.5));
        assert_eq!(report.fact_rec, 0.5);
    }

    #[test]
    fn missing_judgment_and_unclassified_are_errors() {
        let facts = vec![fact(0, FactClass::Textual)];
        assert!(matches!(
            compute_recalls(&facts, &[]),
            Err(MfactError::MissingJudgment { fact_id: 0 })
        ));
        let facts = vec![fact(0, FactClass::Unclassified)];
        assert!(matches!(
            compute_recalls(&facts, &[judgment(0, true)]),
            Err(MfactError::UnclassifiedFact { fact_id: 0 })
        ));
        assert!(matches!(
            compute_recalls(&[], &[]),
            Err(MfactError::EmptyFactSet)
        ));
    }

    #[test]
    fn equal_recalls_collapse_to_common_value() {
        let facts = vec![
            fact(0, FactClass::Visual),
            fact(1, FactClass::Visual),
            fact(2, FactClass::Textual),
            fact(3, FactClass::Textual),
        ];
        let judgments = vec![
            judgment(0, true),
            judgment(1, false),
            judgment(2, true),
            judgment(3, false),
        ];
        let report = compute_recalls(&facts, &judgments).unwrap();
        assert_eq!(report.vis_rec, report.text_rec);
        assert_eq!(report.mfs, Some(0.5));
        assert_eq!(report.fact_rec, 0.5);
    }

    #[test]
    fn evaluate_candidate_end_to_end_with_scripted_judge() {
        use crate::model::scripted::ScriptedBackend;
        let judge = ModelClient::new(Box::new(ScriptedBackend::new()), "judge-model");
        // One sentence splits into a visual clause ("pours a glass of wine")
        // and a textual clause; the candidate supports only the textual one.
        let reference = "Mara pours a glass of wine, and Ellis says he is leaving town.";
        let transcripts = "ELLIS: I am leaving town.";
        let candidate = "Ellis says he is leaving town soon. Mara listens quietly.";
        let eval = evaluate_candidate(&judge, reference, transcripts, candidate).unwrap();
        assert_eq!(eval.records.len(), 2);
        assert_eq!(eval.records[0].fact_class, FactClass::Visual);
        assert_eq!(eval.records[1].fact_class, FactClass::Textual);
        assert_eq!(eval.report.counts.visual, 1);
        assert_eq!(eval.report.counts.textual, 1);
        assert_eq!(eval.report.vis_rec, Some(0.0));
        assert_eq!(eval.report.text_rec, Some(1.0));
        assert_eq!(eval.report.mfs, Some(0.5));
        assert!(eval.audit.is_empty());
        // fact ids strictly increasing in record order
        assert!(eval.records.windows(2).all(|w| w[0].fact_id < w[1].fact_id));
    }

    #[test]
    fn unparseable_support_excludes_fact_and_audits() {
        let reference = "Nina smiled.";
        let transcripts = "NINA: hello";
        let candidate = "Nina smiled.";
        let id_prompt = prompts::fill(prompts::FACT_IDENTIFICATION_TEMPLATE, &[("<INPUT FACT>", reference)]);
        let s1_prompt = prompts::fill(
            prompts::FACT_TRANSCRIPT_SUPPORT_TEMPLATE,
            &[("<TRANSCRIPTS>", transcripts), ("<INPUT FACT>", "Nina smiled.")],
        );
        let s2_prompt = prompts::fill(
            prompts::FACT_CONVERSATION_FEWSHOT_TEMPLATE,
            &[("<INPUT FACT>", "Nina smiled.")],
        );
        let sup_prompt = prompts::fill(
            prompts::FACT_SUPPORT_TEMPLATE,
            &[("<TRANSCRIPTS>", candidate), ("<INPUT FACT>", "Nina smiled.")],
        );
        // a second fact keeps the scored set non-empty after the exclusion
        let probe = replay_client(vec![]);
        let mut fixtures = vec![
            fixture_for(&probe, id_prompt, "- Nina smiled.\n- Nina waved."),
            fixture_for(&probe, s1_prompt, "True."),
            fixture_for(&probe, s2_prompt, "True"),
            fixture_for(&probe, sup_prompt, "Hard to say."),
        ];
        fixtures.extend([
            fixture_for(
                &probe,
                prompts::fill(
                    prompts::FACT_TRANSCRIPT_SUPPORT_TEMPLATE,
                    &[("<TRANSCRIPTS>", transcripts), ("<INPUT FACT>", "Nina waved.")],
                ),
                "True.",
            ),
            fixture_for(
                &probe,
                prompts::fill(
                    prompts::FACT_CONVERSATION_FEWSHOT_TEMPLATE,
                    &[("<INPUT FACT>", "Nina waved.")],
                ),
                "True",
            ),
            fixture_for(
                &probe,
                prompts::fill(
                    prompts::FACT_SUPPORT_TEMPLATE,
                    &[("<TRANSCRIPTS>", candidate), ("<INPUT FACT>", "Nina waved.")],
                ),
                "False. Not mentioned.",
            ),
        ]);
        let client = replay_client(fixtures);
        let eval = evaluate_candidate(&client, reference, transcripts, candidate).unwrap();
        // First fact's support was unparseable: excluded from counts, audited.
        assert_eq!(eval.report.counts.textual, 1);
        assert_eq!(eval.judgments.len(), 1);
        assert_eq!(eval.audit.len(), 1);
        assert_eq!(eval.audit[0].stage, "support");
        assert_eq!(eval.audit[0].fact_id, Some(0));
    }
}
