//! The evaluation report: everything a scored summary gets measured on.
//!
//! Recall metrics are reported as percentages rounded to two decimals (the
//! rounded value is the nearest representable double, so serialization is
//! platform-stable). The `meteor` and `bert_score` fields are reserved for
//! external neural scorers and are never populated by this crate.

use serde::{Deserialize, Serialize};

use crate::mfactsum::{AuditEntry, FactCounts, FactEvaluation, Judgment, RecallReport};
use crate::metrics::RougeTriple;

/// Round a fraction in [0, 1] to a percentage with two decimals.
pub fn percent2(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

/// Round an already-percent value to two decimals.
pub fn round2(percent: f64) -> f64 {
    (percent * 100.0).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactMetricsBlock {
    pub vis_rec: Option<f64>,
    pub text_rec: Option<f64>,
    pub mfs: Option<f64>,
    pub fact_rec: f64,
    pub counts: FactCounts,
}

impl FactMetricsBlock {
    pub fn from_report(report: &RecallReport) -> Self {
        Self {
            vis_rec: report.vis_rec.map(percent2),
            text_rec: report.text_rec.map(percent2),
            mfs: report.mfs.map(percent2),
            fact_rec: percent2(report.fact_rec),
            counts: report.counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RougeBlock {
    pub r1: f64,
    pub r2: f64,
    pub rlsum: f64,
}

impl RougeBlock {
    pub fn from_triple(triple: &RougeTriple) -> Self {
        Self {
            r1: round2(triple.r1),
            r2: round2(triple.r2),
            rlsum: round2(triple.rlsum),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub episode_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary_style: Option<String>,
    /// Whitespace word count of the scored summary.
    pub avg_len: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facts: Option<FactMetricsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge: Option<RougeBlock>,
    /// Mean per-clip character-identification IoU, percent, when human
    /// annotations were provided.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou: Option<f64>,
    /// Reserved for an external scorer; never set by this crate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meteor: Option<f64>,
    /// Reserved for an external scorer; never set by this crate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bert_score: Option<f64>,
    pub judgments: Vec<Judgment>,
    pub audit: Vec<AuditEntry>,
}

impl EvaluationReport {
    pub fn new(episode_id: &str) -> Self {
        Self {
            episode_id: episode_id.to_string(),
            summary_style: None,
            avg_len: 0.0,
            facts: None,
            rouge: None,
            iou: None,
            meteor: None,
            bert_score: None,
            judgments: Vec::new(),
            audit: Vec::new(),
        }
    }

    pub fn with_fact_evaluation(mut self, eval: &FactEvaluation) -> Self {
        self.facts = Some(FactMetricsBlock::from_report(&eval.report));
        self.judgments = eval.judgments.clone();
        self.audit = eval.audit.clone();
        self
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_rounding_prints_two_decimals() {
        assert_eq!(percent2(0.390_8), 39.08);
        assert_eq!(serde_json::to_string(&percent2(0.390_8)).unwrap(), "39.08");
        assert_eq!(percent2(1.0 / 3.0), 33.33);
        assert_eq!(round2(30.595), 30.6);
    }

    #[test]
    fn fact_block_converts_fractions() {
        let report = RecallReport {
            vis_rec: Some(2.0 / 3.0),
            text_rec: Some(0.8),
            mfs: Some((2.0 / 3.0 + 0.8) / 2.0),
            fact_rec: 0.75,
            counts: FactCounts {
                visual: 3,
                textual: 5,
                supported_visual: 2,
                supported_textual: 4,
            },
        };
        let block = FactMetricsBlock::from_report(&report);
        assert_eq!(block.vis_rec, Some(66.67));
        assert_eq!(block.text_rec, Some(80.0));
        assert_eq!(block.mfs, Some(73.33));
        assert_eq!(block.fact_rec, 75.0);
    }

    #[test]
    fn report_omits_absent_blocks() {
        let report = EvaluationReport::new("ep");
        let json = report.to_json_pretty();
        assert!(!json.contains("facts"));
        assert!(!json.contains("meteor"));
        assert!(json.contains("\"episode_id\": \"ep\""));
    }
}
