//! Minimal JSON-over-HTTP provider adapter.
//!
//! Posts `{model, prompt, media, temperature, max_output_tokens}` to the
//! configured endpoint and expects `{text, usage?}` back. Anything
//! provider-specific (video upload protocols, content part layouts) belongs
//! in a dedicated [`super::ModelBackend`] implementation; this adapter only
//! passes the clip reference and frame policy through.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{estimate_tokens, ModelBackend, ModelError, ModelRequest, ModelResponse, Usage};

pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .http_status_as_error(false)
            .build();
        Self {
            agent: config.new_agent(),
            endpoint: endpoint.into(),
            api_key,
        }
    }
}

/// Wire payload for a request.
pub fn request_payload(req: &ModelRequest) -> Value {
    json!({
        "model": req.model_id,
        "prompt": req.prompt_text,
        "media": req.media,
        "temperature": req.params.temperature,
        "max_output_tokens": req.params.max_output_tokens,
    })
}

/// Extract text and optional usage from a provider response body.
pub fn parse_response(body: &Value) -> Result<(String, Option<Usage>), ModelError> {
    let text = body
        .get("text")
        .and_then(Value::as_str)
        .ok_or_else(|| ModelError::Data("response body has no `text` field".into()))?
        .to_string();
    let usage = body.get("usage").and_then(|u| {
        Some(Usage {
            input_tokens: u.get("input_tokens")?.as_u64()?,
            output_tokens: u.get("output_tokens")?.as_u64()?,
        })
    });
    Ok((text, usage))
}

fn looks_like_prompt_too_long(body: &str) -> bool {
    let lower = body.to_lowercase();
    lower.contains("too long") || lower.contains("context length") || lower.contains("token limit")
}

impl ModelBackend for HttpBackend {
    fn complete(&self, req: &ModelRequest) -> Result<ModelResponse, ModelError> {
        let started = Instant::now();
        let mut builder = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            builder = builder.header("authorization", &format!("Bearer {key}"));
        }
        let mut response = builder
            .send_json(request_payload(req))
            .map_err(|e| ModelError::Transport(e.to_string()))?;

        let status = response.status().as_u16();
        let body_text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ModelError::Transport(e.to_string()))?;

        if status == 429 || status >= 500 {
            return Err(ModelError::Transport(format!("http status {status}")));
        }
        if (400..500).contains(&status) {
            if looks_like_prompt_too_long(&body_text) {
                return Err(ModelError::PromptTooLong(format!("http status {status}")));
            }
            return Err(ModelError::BackendUnavailable {
                attempts: 1,
                last_error: format!("http status {status}: {body_text}"),
            });
        }

        let body: Value = serde_json::from_str(&body_text)
            .map_err(|e| ModelError::Data(format!("response body is not JSON: {e}")))?;
        let (text, usage) = parse_response(&body)?;
        let usage = usage.unwrap_or(Usage {
            input_tokens: estimate_tokens(&req.prompt_text),
            output_tokens: estimate_tokens(&text),
        });
        Ok(ModelResponse {
            text,
            usage,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FramePolicy, GenerationParams, MediaRef, Role};

    #[test]
    fn payload_carries_media_and_params() {
        let req = ModelRequest {
            role: Role::Captioner,
            model_id: "cap-1".into(),
            prompt_text: "describe".into(),
            media: Some(MediaRef {
                clip: "clip_0.mp4".into(),
                frame_policy: FramePolicy::MaxFrames(250),
            }),
            params: GenerationParams {
                temperature: 0.0,
                max_output_tokens: Some(512),
            },
        };
        let payload = request_payload(&req);
        assert_eq!(payload["model"], "cap-1");
        assert_eq!(payload["media"]["clip"], "clip_0.mp4");
        assert_eq!(payload["media"]["frame_policy"]["max_frames"], 250);
        assert_eq!(payload["max_output_tokens"], 512);
    }

    #[test]
    fn parse_response_requires_text() {
        let ok = json!({"text": "hi", "usage": {"input_tokens": 5, "output_tokens": 2}});
        let (text, usage) = parse_response(&ok).unwrap();
        assert_eq!(text, "hi");
        assert_eq!(usage.unwrap().input_tokens, 5);

        let no_usage = json!({"text": "hi"});
        let (_, usage) = parse_response(&no_usage).unwrap();
        assert!(usage.is_none());

        assert!(parse_response(&json!({"other": 1})).is_err());
    }

    #[test]
    fn prompt_too_long_detection() {
        assert!(looks_like_prompt_too_long("input is too long for model"));
        assert!(looks_like_prompt_too_long("exceeds CONTEXT LENGTH"));
        assert!(!looks_like_prompt_too_long("bad api key"));
    }

    /// One-shot loopback HTTP server returning a fixed response.
    fn serve_once(status_line: &'static str, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
        use std::io::{Read, Write};
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}/complete", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = vec![0u8; 65536];
            let mut request = String::new();
            loop {
                let n = stream.read(&mut buf).unwrap();
                request.push_str(&String::from_utf8_lossy(&buf[..n]));
                if let Some(header_end) = request.find("\r\n\r\n") {
                    let content_length = request
                        .lines()
                        .find_map(|l| l.to_lowercase().strip_prefix("content-length: ").map(str::to_string))
                        .and_then(|v| v.trim().parse::<usize>().ok())
                        .unwrap_or(0);
                    if request.len() >= header_end + 4 + content_length {
                        break;
                    }
                }
            }
            let response = format!(
                "{status_line}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
            request
        });
        (endpoint, handle)
    }

    fn captioner_request() -> ModelRequest {
        ModelRequest {
            role: Role::Captioner,
            model_id: "live-model".into(),
            prompt_text: "describe the clip".into(),
            media: Some(MediaRef {
                clip: "clips/clip_0.mp4".into(),
                frame_policy: FramePolicy::FramesPerSecond(1.0),
            }),
            params: GenerationParams::default(),
        }
    }

    #[test]
    fn live_round_trip_over_loopback() {
        let (endpoint, server) = serve_once(
            "HTTP/1.1 200 OK",
            r#"{"text":"a caption","usage":{"input_tokens":11,"output_tokens":3}}"#,
        );
        let backend = HttpBackend::new(endpoint, Some("k-123".into()));
        let resp = backend.complete(&captioner_request()).unwrap();
        assert_eq!(resp.text, "a caption");
        assert_eq!(resp.usage.input_tokens, 11);

        let request = server.join().unwrap();
        assert!(request.starts_with("POST /complete"));
        assert!(request.contains("authorization: Bearer k-123"));
        let body = request.split("\r\n\r\n").nth(1).expect("request has a body");
        let payload: Value = serde_json::from_str(body).expect("request body is JSON");
        assert_eq!(payload["model"], "live-model");
        assert_eq!(payload["media"]["clip"], "clips/clip_0.mp4");
        assert_eq!(payload["temperature"], 0.0);
    }

    #[test]
    fn rate_limited_status_is_a_retryable_transport_error() {
        let (endpoint, server) = serve_once("HTTP/1.1 429 Too Many Requests", "slow down");
        let backend = HttpBackend::new(endpoint, None);
        assert!(matches!(
            backend.complete(&captioner_request()),
            Err(ModelError::Transport(_))
        ));
        server.join().unwrap();
    }

    #[test]
    fn oversized_prompt_rejection_is_surfaced() {
        let (endpoint, server) = serve_once(
            "HTTP/1.1 400 Bad Request",
            r#"{"error":"prompt is too long for this model"}"#,
        );
        let backend = HttpBackend::new(endpoint, None);
        assert!(matches!(
            backend.complete(&captioner_request()),
            Err(ModelError::PromptTooLong(_))
        ));
        server.join().unwrap();
    }
}
