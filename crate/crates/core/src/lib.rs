//! Screenwright: screenplay-based TV episode summarization and multimodal
//! summary evaluation.
//!
//! The library turns an episode video plus its time-aligned transcript into
//! a screenplay document and a textual summary through pluggable model
//! backends, and scores any candidate summary with a class-balanced fact
//! recall (MFS), classic ROUGE variants, and a character-identification IoU
//! check. Every model-facing stage runs offline and byte-deterministically
//! through the record/replay backend.
//!
//! Module map:
//! - [`ingest`]: episode manifests, transcripts, reference summaries
//! - [`clips`]: dialogue-pause clip selection and the random baseline
//! - [`model`]: backend interface, record/replay, cache, rate limit, costs
//! - [`prompts`]: the pinned prompt templates
//! - [`caption`]: two-turn clip captioning with character extraction
//! - [`screenplay`]: caption/transcript interleaving and rendering
//! - [`summarize`]: the four summary prompt styles
//! - [`mfactsum`]: fact decomposition, classification and recall scoring
//! - [`metrics`]: ROUGE-1/2/Lsum, IoU, aggregation
//! - [`store`]: resumable artifact store with digests and run manifests
//! - [`report`]: the evaluation report schema

pub mod caption;
pub mod clips;
pub mod ingest;
pub mod metrics;
pub mod mfactsum;
pub mod model;
pub mod prompts;
pub mod report;
pub mod screenplay;
pub mod store;
pub mod summarize;

pub use caption::{Caption, CaptionJob, CaptionRecord};
pub use clips::{ClipOrigin, ClipSpan, SelectionConfig, SliceCommand, SpeechInterval};
pub use ingest::{AlignmentDiagnostic, Episode, ReferenceSummary, Utterance};
pub use metrics::{IoUResult, RougeConfig, RougeScore, RougeTriple};
pub use mfactsum::{Fact, FactClass, FactEvaluation, Judgment, RecallReport};
pub use model::{
    BackendConfig, BackendKind, FramePolicy, ModelBackend, ModelClient, ModelRequest,
    ModelResponse, PriceTable, Role, Usage,
};
pub use report::EvaluationReport;
pub use screenplay::{Screenplay, ScreenplayEvent};
pub use store::{RunManifest, RunStore, Stage};
pub use summarize::{Summary, SummaryStyle};
