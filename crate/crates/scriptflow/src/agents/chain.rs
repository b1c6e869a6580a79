//! Stage-2 output: an ordered list of component instances and how their inputs are bound.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use scriptflow_core::graph_ir::{
    auto_layout_positions, NodeId, PinnedValue, PortRef, Position, ScriptEdge, ScriptNode,
};
use scriptflow_core::registry::{Catalog, Resolution};
use scriptflow_core::ScriptDocument;
use serde_json::{json, Value};

use super::brief::{section, sections, strip_marker};

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Output of an earlier step; `port` is `None` for the component's first output.
    Ref { label: String, port: Option<String> },
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub port: String,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub label: String,
    pub component: String,
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentChain {
    pub steps: Vec<ChainStep>,
}

const LOOP_WORDS: [&str; 7] = ["for", "foreach", "while", "repeat", "loop", "until", "do"];

/// Slider bounds written as bindings on a Number Slider step.
const SLIDER_ARGS: [&str; 3] = ["min", "max", "value"];

fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits on commas outside double quotes.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut start, mut quoted, mut escaped) = (0, false, false);
    for (i, c) in s.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if quoted => escaped = true,
            '"' => quoted = !quoted,
            ',' if !quoted => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().filter(|a| !a.trim().is_empty()).collect()
}

fn parse_source(s: &str, known: &BTreeSet<String>) -> Result<Source, String> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        if x.is_finite() {
            return Ok(Source::Number(x));
        }
    }
    if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
        return serde_json::from_str::<String>(s).map(Source::Text).map_err(|e| format!("bad text literal {s}: {e}"));
    }
    let (label, port) = match s.split_once('.') {
        Some((l, p)) => (l.trim(), Some(p.trim().to_string())),
        None => (s, None),
    };
    if !is_label(label) {
        return Err(format!("`{s}` is neither a number, a quoted text nor a step label"));
    }
    if !known.contains(label) {
        return Err(format!("`{label}` is not the label of an earlier step"));
    }
    Ok(Source::Ref { label: label.to_string(), port })
}

fn parse_step(line: &str, known: &BTreeSet<String>) -> Result<ChainStep, String> {
    let body = strip_marker(line);
    let first = body.split(|c: char| !c.is_ascii_alphanumeric()).next().unwrap_or("").to_ascii_lowercase();
    if LOOP_WORDS.contains(&first.as_str()) {
        return Err(format!("loop constructs are not allowed (`{}`); write every repetition as its own step", line.trim()));
    }
    let expected = || format!("expected `label = Component(Port=source, ...)`, got `{}`", line.trim());
    let (label, call) = body.split_once('=').ok_or_else(expected)?;
    let label = label.trim();
    if !is_label(label) {
        return Err(expected());
    }
    if known.contains(label) {
        return Err(format!("label `{label}` is used twice"));
    }
    let call = call.trim();
    let open = call.find('(').ok_or_else(expected)?;
    let args = call[open + 1..].strip_suffix(')').ok_or_else(expected)?;
    let component = call[..open].trim();
    if component.is_empty() {
        return Err(expected());
    }
    let mut bindings = Vec::new();
    for arg in split_args(args) {
        let (port, src) = arg.split_once('=').ok_or_else(|| format!("argument `{}` lacks `=`", arg.trim()))?;
        let port = port.trim();
        if port.is_empty() {
            return Err(format!("argument `{}` has no port name", arg.trim()));
        }
        bindings.push(Binding { port: port.to_string(), source: parse_source(src, known)? });
    }
    Ok(ChainStep { label: label.to_string(), component: component.to_string(), bindings })
}

/// Parses the CHAIN / NOTES template. Returns the chain and the notes.
pub fn parse_chain(raw: &str) -> Result<(ComponentChain, String), String> {
    let secs = sections(raw, &["CHAIN", "NOTES"]);
    let lines = section(&secs, "CHAIN").ok_or("missing CHAIN section")?;
    let mut known = BTreeSet::new();
    let mut steps = Vec::new();
    for line in lines.iter().filter(|l| !l.trim().is_empty()) {
        let step = parse_step(line, &known)?;
        known.insert(step.label.clone());
        steps.push(step);
    }
    if steps.is_empty() {
        return Err("CHAIN section lists no steps".into());
    }
    let notes = section(&secs, "NOTES").map(|l| l.join("\n").trim().to_string()).unwrap_or_default();
    Ok((ComponentChain { steps }, notes))
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Ref { label, port: Some(p) } => write!(f, "{label}.{p}"),
            Source::Ref { label, port: None } => write!(f, "{label}"),
            Source::Number(x) => write!(f, "{x}"),
            Source::Text(t) => write!(f, "{}", Value::String(t.clone())),
        }
    }
}

impl ComponentChain {
    /// Canonical text form; the only part of stage 2 that stage 3 sees.
    pub fn render(&self) -> String {
        let mut s = String::from("CHAIN:\n");
        for (k, step) in self.steps.iter().enumerate() {
            let args: Vec<String> = step.bindings.iter().map(|b| format!("{}={}", b.port, b.source)).collect();
            writeln!(s, "{}. {} = {}({})", k + 1, step.label, step.component, args.join(", ")).unwrap();
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                let bindings: Vec<Value> = s
                    .bindings
                    .iter()
                    .map(|b| {
                        let source = match &b.source {
                            Source::Ref { label, port } => json!({"ref": label, "port": port}),
                            Source::Number(x) => json!({"number": x}),
                            Source::Text(t) => json!({"text": t}),
                        };
                        json!({"port": b.port, "source": source})
                    })
                    .collect();
                json!({"label": s.label, "component": s.component, "bindings": bindings})
            })
            .collect();
        json!({"steps": steps})
    }

    /// One finding per step whose component is not a verbatim catalog name. Unknown names
    /// are kept; the validator reports them once the document exists.
    pub fn check(&self, catalog: &Catalog) -> Vec<String> {
        let mut out = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            match catalog.resolve_name(&step.component) {
                Resolution::Exact { item, .. } if item.canonical_name == step.component => {}
                Resolution::Exact { item, .. } | Resolution::Fuzzy { item, .. } => out.push(format!(
                    "step {} (`{}`): `{}` read as {}",
                    k + 1,
                    step.label,
                    step.component,
                    item.canonical_name
                )),
                Resolution::Unknown { .. } => out.push(format!(
                    "step {} (`{}`): `{}` is not an allowed component and is kept as unknown",
                    k + 1,
                    step.label,
                    step.component
                )),
            }
        }
        out
    }

    /// Mechanical translation: one node per step (ids from 1), an edge per reference, a pin
    /// per literal. Positions come from the auto-layout.
    pub fn to_document(&self, catalog: &Catalog, prompt: Option<&str>) -> ScriptDocument {
        let mut ids: BTreeMap<&str, (NodeId, Option<String>)> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            let id = NodeId(k as u64 + 1);
            let spec = catalog.resolve_name(&step.component).item().copied();
            let first_out = spec.and_then(|s| s.outputs.first()).map(|p| p.name.clone());
            let mut pins = BTreeMap::new();
            let slider = spec.is_some_and(|s| s.is_slider());
            let mut bounds: BTreeMap<&str, f64> = BTreeMap::new();
            for b in &step.bindings {
                match &b.source {
                    Source::Number(x) if slider && SLIDER_ARGS.contains(&b.port.to_ascii_lowercase().as_str()) => {
                        let key = SLIDER_ARGS.iter().find(|a| a.eq_ignore_ascii_case(&b.port)).unwrap();
                        bounds.insert(key, *x);
                    }
                    Source::Number(x) => {
                        pins.insert(b.port.clone(), PinnedValue::Number(*x));
                    }
                    Source::Text(t) => {
                        pins.insert(b.port.clone(), PinnedValue::Text(t.clone()));
                    }
                    Source::Ref { label, port } => {
                        let (from, default_port) = &ids[label.as_str()];
                        let from_port = port.clone().or_else(|| default_port.clone()).unwrap_or_else(|| "Out".into());
                        edges.push(ScriptEdge::new(PortRef { node: *from, port: from_port }, PortRef::new(id.0, b.port.clone())));
                    }
                }
            }
            if slider && !bounds.is_empty() {
                let value = bounds.get("value").copied().unwrap_or(0.0);
                let min = bounds.get("min").copied().unwrap_or(value.min(0.0));
                let max = bounds.get("max").copied().unwrap_or(value.max(1.0));
                pins.insert(first_out.clone().unwrap_or_else(|| "N".into()), PinnedValue::Slider { min, max, value });
            }
            ids.insert(&step.label, (id, first_out));
            nodes.push(ScriptNode { id, component: step.component.clone(), position: Position::default(), pins });
        }
        let layout = auto_layout_positions(&nodes, &edges);
        for n in &mut nodes {
            n.position = layout[&n.id];
        }
        ScriptDocument { schema_version: 1, prompt: prompt.map(str::to_string), nodes, edges }.canonical()
    }
}
