//! Backend configuration and client construction.
//!
//! A backend config is one JSON object inside the pipeline config. API keys
//! never appear in config files; live backends read them from
//! `SCREENWRIGHT_API_KEY_<PROVIDER>` with the provider name uppercased.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::http::HttpBackend;
use super::replay::{RecordingBackend, ReplayBackend};
use super::scripted::ScriptedBackend;
use super::{
    FramePolicy, GenerationParams, ModelBackend, ModelClient, ModelError, PriceTable, RateLimiter,
    ResponseCache,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// Scripted responses from a fixture file; fails on unknown requests.
    Replay,
    /// Deterministic rule-based responses; no fixtures required.
    Scripted,
    /// JSON-over-HTTP provider endpoint.
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLimitConfig {
    pub requests_per_s: f64,
    pub burst: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub model_id: String,
    /// Provider name for API key lookup, e.g. "gemini" reads
    /// `SCREENWRIGHT_API_KEY_GEMINI`.
    #[serde(default)]
    pub provider: Option<String>,
    #[serde(default)]
    pub endpoint: Option<String>,
    /// Replay fixture file (required for `kind = "replay"`).
    #[serde(default)]
    pub fixtures: Option<PathBuf>,
    /// When set, every response is appended here as a replay fixture.
    #[serde(default)]
    pub record_into: Option<PathBuf>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub frame_policy: FramePolicy,
    #[serde(default)]
    pub prices: PriceTable,
    #[serde(default)]
    pub rate_limit: Option<RateLimitConfig>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
}

/// Environment variable a live backend reads its API key from.
pub fn api_key_env_var(provider: &str) -> String {
    let normalized: String = provider
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_uppercase()
            } else {
                '_'
            }
        })
        .collect();
    format!("SCREENWRIGHT_API_KEY_{normalized}")
}

/// Resolve relative paths in the config against a base directory (typically
/// the directory holding the config file).
pub fn resolve_paths(cfg: &mut BackendConfig, base: &Path) {
    for path in [&mut cfg.fixtures, &mut cfg.record_into, &mut cfg.cache_dir]
        .into_iter()
        .flatten()
    {
        if path.is_relative() {
            *path = base.join(&path);
        }
    }
}

/// Build a ready-to-use client from a backend config.
pub fn build_client(cfg: &BackendConfig) -> Result<ModelClient, ModelError> {
    let base: Box<dyn ModelBackend> = match cfg.kind {
        BackendKind::Replay => {
            let fixtures = cfg.fixtures.as_ref().ok_or_else(|| {
                ModelError::InvalidRequest("replay backend requires `fixtures`".into())
            })?;
            Box::new(ReplayBackend::from_path(fixtures)?)
        }
        BackendKind::Scripted => Box::new(ScriptedBackend::new()),
        BackendKind::Live => {
            let endpoint = cfg.endpoint.as_ref().ok_or_else(|| {
                ModelError::InvalidRequest("live backend requires `endpoint`".into())
            })?;
            let api_key = cfg
                .provider
                .as_ref()
                .and_then(|p| std::env::var(api_key_env_var(p)).ok());
            Box::new(HttpBackend::new(endpoint.clone(), api_key))
        }
    };

    let backend: Box<dyn ModelBackend> = match &cfg.record_into {
        Some(path) => Box::new(RecordingBackend::create(base, path)?),
        None => base,
    };

    let mut client = ModelClient::new(backend, cfg.model_id.clone())
        .with_params(GenerationParams {
            temperature: cfg.temperature,
            max_output_tokens: cfg.max_output_tokens,
        })
        .with_frame_policy(cfg.frame_policy)
        .with_prices(cfg.prices.clone());
    if let Some(dir) = &cfg.cache_dir {
        client = client.with_cache(ResponseCache::new(dir)?);
    }
    if let Some(rl) = &cfg.rate_limit {
        client = client.with_rate_limiter(RateLimiter::new(rl.requests_per_s, rl.burst));
    }
    Ok(client)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn api_key_env_var_uppercases_provider() {
        assert_eq!(api_key_env_var("gemini"), "SCREENWRIGHT_API_KEY_GEMINI");
        assert_eq!(api_key_env_var("my-provider"), "SCREENWRIGHT_API_KEY_MY_PROVIDER");
    }

    #[test]
    fn config_parses_with_defaults() {
        let cfg: BackendConfig = serde_json::from_str(
            r#"{"kind":"scripted","model_id":"test-model"}"#,
        )
        .unwrap();
        assert_eq!(cfg.kind, BackendKind::Scripted);
        assert_eq!(cfg.temperature, 0.0);
        assert_eq!(cfg.frame_policy, FramePolicy::FramesPerSecond(1.0));
        let client = build_client(&cfg).unwrap();
        assert_eq!(client.model_id(), "test-model");
    }

    #[test]
    fn replay_without_fixtures_is_rejected() {
        let cfg: BackendConfig =
            serde_json::from_str(r#"{"kind":"replay","model_id":"m"}"#).unwrap();
        assert!(matches!(
            build_client(&cfg),
            Err(ModelError::InvalidRequest(_))
        ));
    }

    #[test]
    fn relative_paths_resolve_against_base() {
        let mut cfg: BackendConfig = serde_json::from_str(
            r#"{"kind":"replay","model_id":"m","fixtures":"fix.jsonl","cache_dir":"cache"}"#,
        )
        .unwrap();
        resolve_paths(&mut cfg, Path::new("/base"));
        assert_eq!(cfg.fixtures.as_deref(), Some(Path::new("/base/fix.jsonl")));
        assert_eq!(cfg.cache_dir.as_deref(), Some(Path::new("/base/cache")));
    }

    #[test]
    fn frame_policy_json_forms() {
        let cfg: BackendConfig = serde_json::from_str(
            r#"{"kind":"scripted","model_id":"m","frame_policy":{"max_frames":250}}"#,
        )
        .unwrap();
        assert_eq!(cfg.frame_policy, FramePolicy::MaxFrames(250));
    }
}
