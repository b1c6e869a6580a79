use std::time::Duration;

use serde_json::{json, Value};

use super::{Backend, BackendConfig, BackendError, StageRequest};
use crate::agents::templates::correction;

const TIMEOUT: Duration = Duration::from_secs(90);

/// Chat-completions client: posts `{model, messages, temperature, max_tokens}` and reads
/// `choices[0].message.content`.
pub struct LiveBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    temperature: f64,
    max_tokens: u32,
    api_key: Option<String>,
}

impl LiveBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, BackendError> {
        if config.endpoint.is_empty() {
            return Err(BackendError::Config("SF_API_URL is empty".into()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(TIMEOUT))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(LiveBackend {
            agent,
            endpoint: config.endpoint.clone(),
            model: config.model.clone(),
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            api_key: config.api_key.clone(),
        })
    }

    pub fn request_body(&self, req: &StageRequest<'_>) -> Value {
        let mut messages = vec![json!({"role": "system", "content": req.system}), json!({"role": "user", "content": req.input})];
        if let Some((raw, problem)) = req.previous {
            messages.push(json!({"role": "assistant", "content": raw}));
            messages.push(json!({"role": "user", "content": correction(problem)}));
        }
        json!({
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        })
    }
}

impl Backend for LiveBackend {
    fn complete(&self, req: &StageRequest<'_>) -> Result<String, BackendError> {
        let mut call = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call.send_json(self.request_body(req)).map_err(|e| BackendError::Http(e.to_string()))?;
        let status = resp.status().as_u16();
        let body: Value = resp.body_mut().read_json().map_err(|e| BackendError::Http(format!("status {status}, unreadable body: {e}")))?;
        if !(200..300).contains(&status) {
            let msg = body["error"]["message"].as_str().map(str::to_string).unwrap_or_else(|| body.to_string());
            return Err(BackendError::Http(format!("status {status}: {msg}")));
        }
        body["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Http("response has no choices[0].message.content".into()))
    }
}
