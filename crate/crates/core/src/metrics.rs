//! Lexical summary metrics: ROUGE-1/2/Lsum with max-over-references, mean
//! aggregation, and set-IoU for character identification.
//!
//! Semantics follow the common python rouge-score conventions: lowercased
//! alphanumeric tokens, clipped n-gram counts, and summary-level union-LCS
//! with token-use bookkeeping for ROUGE-Lsum. Stemming is off by default and
//! available through [`RougeConfig`].

use std::collections::BTreeSet;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mfactsum::split_sentences;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("at least one reference summary is required")]
    NoReferences,
    #[error("cannot aggregate an empty value list")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    fn from_counts(overlap: usize, candidate_grams: usize, reference_grams: usize) -> Self {
        if candidate_grams == 0 || reference_grams == 0 {
            return Self::ZERO;
        }
        let precision = overlap as f64 / candidate_grams as f64;
        let recall = overlap as f64 / reference_grams as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }
}

/// The three reported ROUGE variants, as F1 percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeTriple {
    pub r1: f64,
    pub r2: f64,
    pub rlsum: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeConfig {
    /// Apply an English Snowball stem to every token before matching.
    #[serde(default)]
    pub stem: bool,
}

/// Lowercase and split on non-alphanumeric runs; empty tokens dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with(text, &RougeConfig::default())
}

pub fn tokenize_with(text: &str, cfg: &RougeConfig) -> Vec<String> {
    let lower = text.to_lowercase();
    let tokens = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty());
    if cfg.stem {
        let stemmer = rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::English);
        tokens.map(|t| stemmer.stem(t).into_owned()).collect()
    } else {
        tokens.map(str::to_string).collect()
    }
}

/// Clipped n-gram overlap ROUGE for n in {1, 2, ...}.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> RougeScore {
    rouge_n_with(candidate, reference, n, &RougeConfig::default())
}

pub fn rouge_n_with(candidate: &str, reference: &str, n: usize, cfg: &RougeConfig) -> RougeScore {
    let cand = tokenize_with(candidate, cfg);
    let refr = tokenize_with(reference, cfg);
    if cand.len() < n || refr.len() < n {
        return RougeScore::ZERO;
    }
    let mut ref_counts: HashMap<&[String], usize> = HashMap::new();
    for gram in refr.windows(n) {
        *ref_counts.entry(gram).or_default() += 1;
    }
    let mut overlap = 0usize;
    for gram in cand.windows(n) {
        if let Some(count) = ref_counts.get_mut(gram) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }
    RougeScore::from_counts(overlap, cand.len() + 1 - n, refr.len() + 1 - n)
}

/// Summary-level ROUGE-L: union-LCS of each reference sentence against all
/// candidate sentences, with shared token budgets so no token is credited
/// twice.
pub fn rouge_lsum(candidate: &str, reference: &str) -> RougeScore {
    rouge_lsum_with(candidate, reference, &RougeConfig::default())
}

pub fn rouge_lsum_with(candidate: &str, reference: &str, cfg: &RougeConfig) -> RougeScore {
    let cand_sents = tokenized_sentences(candidate, cfg);
    let ref_sents = tokenized_sentences(reference, cfg);
    if cand_sents.is_empty() || ref_sents.is_empty() {
        return RougeScore::ZERO;
    }
    let n: usize = cand_sents.iter().map(Vec::len).sum();
    let m: usize = ref_sents.iter().map(Vec::len).sum();

    let mut ref_budget: HashMap<&str, usize> = HashMap::new();
    for s in &ref_sents {
        for t in s {
            *ref_budget.entry(t).or_default() += 1;
        }
    }
    let mut cand_budget: HashMap<&str, usize> = HashMap::new();
    for s in &cand_sents {
        for t in s {
            *cand_budget.entry(t).or_default() += 1;
        }
    }

    let mut hits = 0usize;
    for ref_sent in &ref_sents {
        for idx in union_lcs_indices(ref_sent, &cand_sents) {
            let token = ref_sent[idx].as_str();
            let r = ref_budget.get_mut(token);
            let c = cand_budget.get_mut(token);
            if let (Some(r), Some(c)) = (r, c) {
                if *r > 0 && *c > 0 {
                    *r -= 1;
                    *c -= 1;
                    hits += 1;
                }
            }
        }
    }
    RougeScore::from_counts(hits, n, m)
}

fn tokenized_sentences(text: &str, cfg: &RougeConfig) -> Vec<Vec<String>> {
    split_sentences(text)
        .iter()
        .map(|s| tokenize_with(s, cfg))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Union over all candidate sentences of the reference-token indices matched
/// by an LCS, sorted ascending.
fn union_lcs_indices(ref_sent: &[String], cand_sents: &[Vec<String>]) -> Vec<usize> {
    let mut union: BTreeSet<usize> = BTreeSet::new();
    for cand in cand_sents {
        union.extend(lcs_ref_indices(ref_sent, cand));
    }
    union.into_iter().collect()
}

/// Indices into `a` of one canonical longest common subsequence with `b`.
fn lcs_ref_indices(a: &[String], b: &[String]) -> Vec<usize> {
    let (m, n) = (a.len(), b.len());
    let mut dp = vec![vec![0usize; n + 1]; m + 1];
    for i in 0..m {
        for j in 0..n {
            dp[i + 1][j + 1] = if a[i] == b[j] {
                dp[i][j] + 1
            } else {
                dp[i][j + 1].max(dp[i + 1][j])
            };
        }
    }
    let mut indices = Vec::with_capacity(dp[m][n]);
    let (mut i, mut j) = (m, n);
    while i > 0 && j > 0 {
        if a[i - 1] == b[j - 1] {
            indices.push(i - 1);
            i -= 1;
            j -= 1;
        } else if dp[i - 1][j] >= dp[i][j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    indices.reverse();
    indices
}

/// Each of r1/r2/rlsum maximized independently over the references, as F1
/// percentages.
pub fn rouge_max(candidate: &str, references: &[&str]) -> Result<RougeTriple, MetricsError> {
    rouge_max_with(candidate, references, &RougeConfig::default())
}

pub fn rouge_max_with(
    candidate: &str,
    references: &[&str],
    cfg: &RougeConfig,
) -> Result<RougeTriple, MetricsError> {
    if references.is_empty() {
        return Err(MetricsError::NoReferences);
    }
    let mut best = RougeTriple {
        r1: 0.0,
        r2: 0.0,
        rlsum: 0.0,
    };
    for reference in references {
        best.r1 = best.r1.max(rouge_n_with(candidate, reference, 1, cfg).f1 * 100.0);
        best.r2 = best.r2.max(rouge_n_with(candidate, reference, 2, cfg).f1 * 100.0);
        best.rlsum = best.rlsum.max(rouge_lsum_with(candidate, reference, cfg).f1 * 100.0);
    }
    Ok(best)
}

/// Set intersection-over-union of predicted vs human character name sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IoUResult {
    pub intersection_count: usize,
    pub union_count: usize,
    pub score: f64,
}

/// Name sets are expected in normalized key form (see `ingest::name_key`).
/// Two empty sets agree perfectly and score 1.0.
pub fn iou_characters(pred: &BTreeSet<String>, human: &BTreeSet<String>) -> IoUResult {
    let intersection_count = pred.intersection(human).count();
    let union_count = pred.union(human).count();
    let score = if union_count == 0 {
        1.0
    } else {
        intersection_count as f64 / union_count as f64
    };
    IoUResult {
        intersection_count,
        union_count,
        score,
    }
}

/// Arithmetic mean.
pub fn aggregate(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
