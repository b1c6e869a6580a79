//! Text-generation backends behind the agent stages.

mod live;
mod mock;

use std::fmt;
use std::path::PathBuf;

pub use live::LiveBackend;
pub use mock::{fixture_key, Fallback, MockBackend, MockEntry};

/// One call to a backend.
#[derive(Debug, Clone, Copy)]
pub struct StageRequest<'a> {
    pub stage: u8,
    pub system: &'a str,
    /// Stage input: the prompt for stage 1, the rendered output of the previous stage otherwise.
    pub input: &'a str,
    /// 1-based.
    pub attempt: u32,
    /// Raw reply of the previous attempt and what was wrong with it.
    pub previous: Option<(&'a str, &'a str)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendError {
    /// No canned reply for this input (mock with the error fallback).
    NoFixture { stage: u8, key: String },
    Http(String),
    Config(String),
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendError::NoFixture { stage, key } => write!(f, "no mock reply for stage {stage} key {key}"),
            BackendError::Http(m) => write!(f, "backend request failed: {m}"),
            BackendError::Config(m) => write!(f, "backend configuration: {m}"),
        }
    }
}

impl std::error::Error for BackendError {}

pub trait Backend: Send + Sync {
    fn complete(&self, req: &StageRequest<'_>) -> Result<String, BackendError>;
}

impl<F> Backend for F
where
    F: Fn(&StageRequest<'_>) -> Result<String, BackendError> + Send + Sync,
{
    fn complete(&self, req: &StageRequest<'_>) -> Result<String, BackendError> {
        self(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Live,
    Mock,
}

impl BackendKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" => Some(BackendKind::Live),
            "mock" => Some(BackendKind::Mock),
            _ => None,
        }
    }
}

pub const DEFAULT_TEMPERATURE: f64 = 0.2;
pub const DEFAULT_MAX_TOKENS: u32 = 4096;
pub const DEFAULT_API_URL: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Clone, PartialEq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub api_key: Option<String>,
    /// Extra mock fixture directory; its entries override the built-in ones.
    pub fixtures: Option<PathBuf>,
    pub fallback: Fallback,
}

impl fmt::Debug for BackendConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackendConfig")
            .field("kind", &self.kind)
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .field("max_tokens", &self.max_tokens)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("fixtures", &self.fixtures)
            .field("fallback", &self.fallback)
            .finish()
    }
}

impl BackendConfig {
    pub fn mock() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            endpoint: DEFAULT_API_URL.into(),
            model: DEFAULT_MODEL.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            api_key: None,
            fixtures: None,
            fallback: Fallback::Echo,
        }
    }

    /// Reads `SF_BACKEND`, `SF_API_URL`, `SF_API_KEY`, `SF_MODEL`, `SF_TEMPERATURE`,
    /// `SF_MAX_TOKENS` and `SF_MOCK_FALLBACK`. Defaults to the mock backend.
    pub fn from_env() -> Result<Self, BackendError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, BackendError> {
        let mut c = BackendConfig::mock();
        if let Some(k) = get("SF_BACKEND") {
            c.kind = BackendKind::parse(&k).ok_or_else(|| BackendError::Config(format!("SF_BACKEND must be live or mock, got `{k}`")))?;
        }
        if let Some(u) = get("SF_API_URL") {
            c.endpoint = u;
        }
        if let Some(m) = get("SF_MODEL") {
            c.model = m;
        }
        c.api_key = get("SF_API_KEY").filter(|k| !k.is_empty());
        if let Some(t) = get("SF_TEMPERATURE") {
            c.temperature = t
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|t| (0.0..=2.0).contains(t))
                .ok_or_else(|| BackendError::Config(format!("SF_TEMPERATURE must be a number in [0, 2], got `{t}`")))?;
        }
        if let Some(n) = get("SF_MAX_TOKENS") {
            c.max_tokens = n.trim().parse().map_err(|_| BackendError::Config(format!("SF_MAX_TOKENS must be an integer, got `{n}`")))?;
        }
        if let Some(f) = get("SF_MOCK_FALLBACK") {
            c.fallback = match f.trim() {
                "echo" => Fallback::Echo,
                "error" => Fallback::Error,
                other => return Err(BackendError::Config(format!("SF_MOCK_FALLBACK must be echo or error, got `{other}`"))),
            };
        }
        Ok(c)
    }

    pub fn build(&self) -> Result<Box<dyn Backend>, BackendError> {
        Ok(match self.kind {
            BackendKind::Mock => {
                let mut m = MockBackend::builtin().with_fallback(self.fallback);
                if let Some(dir) = &self.fixtures {
                    m.load_dir(dir)?;
                }
                Box::new(m)
            }
            BackendKind::Live => Box::new(LiveBackend::new(self)?),
        })
    }
}
