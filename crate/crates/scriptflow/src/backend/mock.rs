use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use scriptflow_core::{serialize, Catalog};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, StageRequest};
use crate::agents::{parse_brief, parse_chain};

const BUILTIN: [(&str, &str); 5] = [
    ("truss", include_str!("../../fixtures/mock/truss.json")),
    ("umbrella", include_str!("../../fixtures/mock/umbrella.json")),
    ("bridge", include_str!("../../fixtures/mock/bridge.json")),
    ("degenerate", include_str!("../../fixtures/mock/degenerate.json")),
    ("garbage", include_str!("../../fixtures/mock/garbage.json")),
];

/// What the mock does for an input it has no reply for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Error,
    /// Fills the stage template mechanically from the input.
    Echo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockEntry {
    pub stage: u8,
    pub key: String,
    /// Reply only for this attempt; `None` answers every attempt.
    pub attempt: Option<u32>,
    pub reply: String,
}

/// Hash of the whitespace-collapsed, lowercased input: 16 hex digits of SHA-256.
pub fn fixture_key(input: &str) -> String {
    let norm = input.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let digest = Sha256::digest(norm.as_bytes());
    let mut s = String::with_capacity(16);
    for b in digest.iter().take(8) {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// Replays canned stage replies keyed by `(stage, fixture_key(input))`.
#[derive(Debug, Clone)]
pub struct MockBackend {
    entries: BTreeMap<(u8, String, Option<u32>), String>,
    fallback: Fallback,
    catalog: Catalog,
}

impl MockBackend {
    pub fn empty() -> Self {
        MockBackend { entries: BTreeMap::new(), fallback: Fallback::Error, catalog: Catalog::builtin() }
    }

    /// The case-study replies compiled into the binary, with the echo fallback.
    pub fn builtin() -> Self {
        let mut m = MockBackend::empty().with_fallback(Fallback::Echo);
        for (name, text) in BUILTIN {
            m.load_str(text).unwrap_or_else(|e| panic!("built-in fixture {name}: {e}"));
        }
        m
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn insert(&mut self, e: MockEntry) {
        self.entries.insert((e.stage, e.key, e.attempt), e.reply);
    }

    /// Accepts one fixture object or an array of them.
    pub fn load_str(&mut self, text: &str) -> Result<usize, BackendError> {
        let bad = |m: String| BackendError::Config(format!("fixture: {m}"));
        let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let items = match v {
            Value::Array(items) => items,
            obj @ Value::Object(_) => vec![obj],
            _ => return Err(bad("expected an object or an array".into())),
        };
        let n = items.len();
        for item in items {
            let stage = item["stage"].as_u64().filter(|s| (1..=3).contains(s)).ok_or_else(|| bad("`stage` must be 1, 2 or 3".into()))?;
            let key = item["key"].as_str().ok_or_else(|| bad("missing `key`".into()))?;
            let reply = item["reply"].as_str().ok_or_else(|| bad("missing `reply`".into()))?;
            let attempt = match &item["attempt"] {
                Value::Null => None,
                a => Some(a.as_u64().ok_or_else(|| bad("`attempt` must be an integer".into()))? as u32),
            };
            self.insert(MockEntry { stage: stage as u8, key: key.to_string(), attempt, reply: reply.to_string() });
        }
        Ok(n)
    }

    /// Loads every `*.json` file in `dir`, in file-name order.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, BackendError> {
        let io = |e: std::io::Error| BackendError::Config(format!("{}: {e}", dir.display()));
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut n = 0;
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(io)?;
            n += self.load_str(&text).map_err(|e| BackendError::Config(format!("{}: {e}", p.display())))?;
        }
        Ok(n)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn echo(&self, stage: u8, input: &str) -> String {
        match stage {
            1 => format!(
                "INTENT:\n{}\nINPUTS:\n- size: 1..10 = 5\nLOGIC:\nnone\nNOTES:\nno canned reply; template filled from the request\n",
                input.split_whitespace().collect::<Vec<_>>().join(" ")
            ),
            2 => match parse_brief(input) {
                Ok((brief, _)) => {
                    let mut s = String::from("CHAIN:\n");
                    for (k, i) in brief.inputs.iter().enumerate() {
                        let label: String = i.name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
                        let label = if label.starts_with(|c: char| c.is_ascii_alphabetic()) { label } else { format!("in_{label}") };
                        writeln!(s, "{}. {label} = Number Slider(min={}, max={}, value={})", k + 1, i.min, i.max, i.default).unwrap();
                    }
                    s
                }
                Err(e) => format!("no chain: {e}"),
            },
            _ => match parse_chain(input) {
                Ok((chain, _)) => serialize(&chain.to_document(&self.catalog, None)),
                Err(e) => format!("no document: {e}"),
            },
        }
    }
}

impl Backend for MockBackend {
    fn complete(&self, req: &StageRequest<'_>) -> Result<String, BackendError> {
        let key = fixture_key(req.input);
        let hit = self
            .entries
            .get(&(req.stage, key.clone(), Some(req.attempt)))
            .or_else(|| self.entries.get(&(req.stage, key.clone(), None)));
        match (hit, self.fallback) {
            (Some(reply), _) => Ok(reply.clone()),
            (None, Fallback::Echo) => Ok(self.echo(req.stage, req.input)),
            (None, Fallback::Error) => Err(BackendError::NoFixture { stage: req.stage, key }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(stage: u8, input: &str, attempt: u32) -> StageRequest<'_> {
        StageRequest { stage, system: "", input, attempt, previous: None }
    }

    #[test]
    fn key_ignores_case_and_spacing() {
        assert_eq!(fixture_key("A  Truss\n"), fixture_key("a truss"));
        assert_ne!(fixture_key("a truss"), fixture_key("a bridge"));
        assert_eq!(fixture_key("a truss").len(), 16);
    }

    #[test]
    fn builtin_has_case_studies() {
        let m = MockBackend::builtin().with_fallback(Fallback::Error);
        for p in ["a truss", "an umbrella", "a simple suspension bridge"] {
            assert!(m.complete(&req(1, p, 1)).is_ok(), "{p}");
        }
        assert!(matches!(m.complete(&req(1, "a teapot", 1)), Err(BackendError::NoFixture { stage: 1, .. })));
    }

    #[test]
    fn attempt_specific_reply_wins() {
        let mut m = MockBackend::empty();
        m.load_str(r#"[{"stage":1,"key":"k","reply":"any"},{"stage":1,"key":"k","attempt":2,"reply":"second"}]"#).unwrap();
        m.entries = m.entries.into_iter().map(|((s, _, a), r)| ((s, fixture_key("x"), a), r)).collect();
        assert_eq!(m.complete(&req(1, "x", 1)).unwrap(), "any");
        assert_eq!(m.complete(&req(1, "x", 2)).unwrap(), "second");
    }

    #[test]
    fn echo_fills_templates() {
        let m = MockBackend::empty().with_fallback(Fallback::Echo);
        let s1 = m.complete(&req(1, "a lamp", 1)).unwrap();
        let (brief, _) = parse_brief(&s1).unwrap();
        let s2 = m.complete(&req(2, &brief.render(), 1)).unwrap();
        let (chain, _) = parse_chain(&s2).unwrap();
        assert_eq!(chain.steps.len(), 1);
        let s3 = m.complete(&req(3, &chain.render(), 1)).unwrap();
        assert!(scriptflow_core::parse_document_strict(&s3).is_ok());
    }
}
