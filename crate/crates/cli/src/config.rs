//! Pipeline configuration file: selection parameters, the three backend
//! configs, evaluation defaults and output layout.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use screenwright_core::model::config::resolve_paths;
use screenwright_core::{BackendConfig, SelectionConfig, SummaryStyle};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub captioner: Option<BackendConfig>,
    #[serde(default)]
    pub summarizer: Option<BackendConfig>,
    #[serde(default)]
    pub judge: Option<BackendConfig>,
    #[serde(default = "default_style")]
    pub summary_style: SummaryStyle,
    /// Identify characters during captioning and extract them from captions.
    #[serde(default = "default_true")]
    pub with_characters: bool,
    /// Reference source used for fact-based scoring. ROUGE always scores
    /// against all references. `null` disables the filter.
    #[serde(default = "default_reference_filter")]
    pub reference_filter: Option<String>,
    /// Dialogue window (seconds) around a clip quoted in caption prompts.
    #[serde(default = "default_context_pad")]
    pub context_pad_s: f64,
    /// Root directory for run artifacts.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Media slicer binary; `SCREENWRIGHT_SLICER` overrides, `ffmpeg` is the
    /// fallback.
    #[serde(default)]
    pub slicer: Option<String>,
    /// Directory of per-episode speech-interval override files
    /// (`<episode_id>.json`, a JSON list of `{start_s, end_s}`). When a file
    /// exists for an episode, pauses are derived from it instead of from the
    /// transcript, letting an external VAD drive clip selection.
    #[serde(default)]
    pub speech_intervals_dir: Option<PathBuf>,
}

fn default_style() -> SummaryStyle {
    SummaryStyle::ScreenplayHandcrafted
}

fn default_true() -> bool {
    true
}

fn default_reference_filter() -> Option<String> {
    Some("soap_central".to_string())
}

fn default_context_pad() -> f64 {
    15.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            selection: SelectionConfig::default(),
            captioner: None,
            summarizer: None,
            judge: None,
            summary_style: default_style(),
            with_characters: true,
            reference_filter: default_reference_filter(),
            context_pad_s: default_context_pad(),
            output_dir: default_output_dir(),
            seed: 0,
            slicer: None,
            speech_intervals_dir: None,
        }
    }
}

impl PipelineConfig {
    /// Load a config file, resolving relative backend paths against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path)
            .with_context(|| format!("failed to read config {}", path.display()))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&raw)
            .with_context(|| format!("config {} is not valid JSON", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for backend in [&mut cfg.captioner, &mut cfg.summarizer, &mut cfg.judge]
            .into_iter()
            .flatten()
        {
            resolve_paths(backend, base);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(dir) = &mut cfg.speech_intervals_dir {
            if dir.is_relative() {
                *dir = base.join(&dir);
            }
        }
        Ok(cfg)
    }

    /// Resolve the slicer binary: env override, then config, then `ffmpeg`.
    pub fn slicer_bin(&self) -> String {
        std::env::var("SCREENWRIGHT_SLICER")
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| self.slicer.clone())
            .unwrap_or_else(|| "ffmpeg".to_string())
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.summary_style, SummaryStyle::ScreenplayHandcrafted);
        assert_eq!(cfg.reference_filter.as_deref(), Some("soap_central"));
        assert_eq!(cfg.context_pad_s, 15.0);
        assert_eq!(cfg.selection.pause_threshold_s, 3.0);
        assert!(cfg.with_characters);
    }

    #[test]
    fn explicit_null_filter_disables_reference_filtering() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"reference_filter": null}"#).unwrap();
        assert_eq!(cfg.reference_filter, None);
    }

    #[test]
    fn partial_selection_overrides_one_field() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"selection": {"pause_threshold_s": 5.0}}"#).unwrap();
        assert_eq!(cfg.selection.pause_threshold_s, 5.0);
        assert_eq!(cfg.selection.min_clip_s, 10.0);
    }
}
