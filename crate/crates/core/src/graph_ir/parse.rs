//! Strict and tolerant readers for the script wire format.
//!
//! Both share one schema mapper. The strict reader rejects anything off-schema; the tolerant
//! one repairs the usual generated-output quirks and reports each repair as a diagnostic.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde_json::{Map, Value};

use super::document::{NodeId, PinnedValue, PortRef, Position, ScriptDocument, ScriptEdge, ScriptNode, SCHEMA_VERSION};
use super::layout::auto_layout_positions;
use crate::diagnostic::{Diagnostic, Location, Rule, Severity};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    /// Malformed JSON. `offset` is the byte offset (into the caller's text) where the longest
    /// valid prefix ends.
    Syntax { offset: usize, line: usize, column: usize },
    /// Off-schema content at a JSON path.
    Schema { path: String },
    DuplicateId { id: NodeId, path: String },
    DanglingEndpoint { id: NodeId, path: String },
    SelfLoop { id: NodeId, path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn schema(path: &str, message: impl Into<String>) -> Self {
        Self { kind: ParseErrorKind::Schema { path: path.to_string() }, message: message.into() }
    }

    /// JSON path of schema-level errors.
    pub fn path(&self) -> Option<&str> {
        match &self.kind {
            ParseErrorKind::Syntax { .. } => None,
            ParseErrorKind::Schema { path }
            | ParseErrorKind::DuplicateId { path, .. }
            | ParseErrorKind::DanglingEndpoint { path, .. }
            | ParseErrorKind::SelfLoop { path, .. } => Some(path),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax { offset, line, column } => {
                write!(f, "syntax error at byte {offset} (line {line}, column {column}): {}", self.message)
            }
            _ => write!(f, "{}: {}", self.path().unwrap_or("$"), self.message),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strict,
    Tolerant,
}

struct Mapper {
    mode: Mode,
    diags: Vec<Diagnostic>,
}

/// Parses a document, rejecting unknown keys, type deviations and broken references.
pub fn parse_document_strict(text: &str) -> Result<ScriptDocument, ParseError> {
    let value = parse_json(text, None)?;
    let mut m = Mapper { mode: Mode::Strict, diags: Vec::new() };
    m.document(&value)
}

/// Parses a document, repairing code fences, trailing commas, string-encoded numbers, extra
/// keys, missing positions, dangling edges and out-of-range slider values. Every repair is
/// reported. Input accepted by [`parse_document_strict`] yields the same document and no
/// diagnostics.
pub fn parse_document_tolerant(text: &str) -> Result<(ScriptDocument, Vec<Diagnostic>), ParseError> {
    let mut diags = Vec::new();
    let (body, body_offset) = match strip_fence(text) {
        Some((inner, offset)) => {
            diags.push(Diagnostic::new(
                Rule::FenceStripped,
                Severity::Info,
                doc_loc("$"),
                "stripped a markdown code fence around the document",
            ));
            (inner, offset)
        }
        None => (text, 0),
    };
    let (cleaned, origin, commas) = strip_trailing_commas(body);
    for off in commas {
        diags.push(Diagnostic::new(
            Rule::TrailingComma,
            Severity::Info,
            doc_loc("$"),
            format!("removed trailing comma at byte {}", off + body_offset),
        ));
    }
    let value = parse_json(&cleaned, Some((&origin, body_offset)))?;
    let mut m = Mapper { mode: Mode::Tolerant, diags };
    let doc = m.document(&value)?;
    Ok((doc, m.diags))
}

fn doc_loc(path: &str) -> Location {
    Location::Document { path: path.to_string() }
}

fn parse_json(text: &str, origin: Option<(&[usize], usize)>) -> Result<Value, ParseError> {
    serde_json::from_str::<Value>(text).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        let local = line_col_to_offset(text, line, column);
        let offset = match origin {
            Some((map, base)) => map.get(local).copied().unwrap_or_else(|| map.last().map_or(0, |l| l + 1)) + base,
            None => local,
        };
        ParseError { kind: ParseErrorKind::Syntax { offset, line, column }, message: format!("{e}") }
    })
}

fn line_col_to_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(text.len());
        }
        offset += l.len();
    }
    text.len()
}

/// Content between the first fence line and the next one, with its byte offset.
fn strip_fence(text: &str) -> Option<(&str, usize)> {
    let mut offset = 0;
    let mut start = None;
    for line in text.split_inclusive('\n') {
        if line.trim_start().starts_with("```") {
            match start {
                None => start = Some(offset + line.len()),
                Some(s) => return Some((&text[s..offset], s)),
            }
        }
        offset += line.len();
    }
    // An unterminated opening fence still wraps the rest of the text.
    start.map(|s| (&text[s..], s))
}

/// Removes commas that directly precede `}` or `]` outside strings. Returns the cleaned text,
/// a map from cleaned byte offsets to input offsets, and the removed commas' offsets.
fn strip_trailing_commas(text: &str) -> (String, Vec<usize>, Vec<usize>) {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut origin = Vec::with_capacity(text.len());
    let mut removed = Vec::new();
    let mut in_string = false;
    let mut escaped = false;
    for (i, ch) in text.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
        } else if ch == '"' {
            in_string = true;
        } else if ch == ',' {
            let next = bytes[i + 1..].iter().find(|b| !b.is_ascii_whitespace());
            if matches!(next, Some(b'}') | Some(b']')) {
                removed.push(i);
                continue;
            }
        }
        out.push(ch);
        origin.extend(core::iter::repeat(i).take(ch.len_utf8()));
    }
    (out, origin, removed)
}

impl Mapper {
    fn tolerant(&self) -> bool {
        self.mode == Mode::Tolerant
    }

    fn note(&mut self, rule: Rule, severity: Severity, path: &str, message: String) {
        self.diags.push(Diagnostic::new(rule, severity, doc_loc(path), message));
    }

    fn object<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, ParseError> {
        v.as_object().ok_or_else(|| ParseError::schema(path, "expected an object"))
    }

    fn check_keys(&mut self, m: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), ParseError> {
        for key in m.keys() {
            if !allowed.contains(&key.as_str()) {
                let kpath = format!("{path}.{key}");
                if self.tolerant() {
                    self.note(Rule::KeyIgnored, Severity::Info, &kpath, format!("ignored unknown key `{key}`"));
                } else {
                    return Err(ParseError::schema(&kpath, format!("unknown key `{key}`")));
                }
            }
        }
        Ok(())
    }

    fn number(&mut self, v: &Value, path: &str) -> Result<f64, ParseError> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| ParseError::schema(path, "number out of range")),
            Value::String(s) if self.tolerant() => match s.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => {
                    self.note(Rule::NumberCoerced, Severity::Info, path, format!("coerced string \"{s}\" to number"));
                    Ok(x)
                }
                _ => Err(ParseError::schema(path, "expected a number")),
            },
            _ => Err(ParseError::schema(path, "expected a number")),
        }
    }

    fn node_id(&mut self, v: &Value, path: &str) -> Result<NodeId, ParseError> {
        if let Some(id) = v.as_u64() {
            if id >= 1 {
                return Ok(NodeId(id));
            }
            return Err(ParseError::schema(path, "node id must be a positive integer"));
        }
        if self.tolerant() {
            let coerced = match v {
                Value::String(s) => s.trim().parse::<u64>().ok(),
                Value::Number(n) => n.as_f64().filter(|x| *x >= 1.0 && crate::math::floor(*x) == *x && *x < 9.0e15).map(|x| x as u64),
                _ => None,
            };
            if let Some(id) = coerced.filter(|id| *id >= 1) {
                self.note(Rule::NumberCoerced, Severity::Info, path, format!("coerced {v} to node id {id}"));
                return Ok(NodeId(id));
            }
        }
        Err(ParseError::schema(path, "node id must be a positive integer"))
    }

    fn string(&self, v: Option<&Value>, path: &str) -> Result<String, ParseError> {
        match v {
            Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
            Some(Value::String(_)) => Err(ParseError::schema(path, "must not be empty")),
            Some(_) => Err(ParseError::schema(path, "expected a string")),
            None => Err(ParseError::schema(path, "missing required key")),
        }
    }

    fn document(&mut self, v: &Value) -> Result<ScriptDocument, ParseError> {
        let root = self.object(v, "$")?;
        self.check_keys(root, &["schema_version", "prompt", "nodes", "edges"], "$")?;
        match root.get("schema_version") {
            Some(sv) => {
                let n = if self.tolerant() { self.number(sv, "$.schema_version")? } else {
                    sv.as_u64().map(|n| n as f64).ok_or_else(|| ParseError::schema("$.schema_version", "expected an integer"))?
                };
                if n != SCHEMA_VERSION as f64 {
                    return Err(ParseError::schema("$.schema_version", format!("unsupported schema version {sv}")));
                }
            }
            None if self.tolerant() => self.note(
                Rule::FieldDefaulted,
                Severity::Info,
                "$.schema_version",
                format!("missing schema_version, assumed {SCHEMA_VERSION}"),
            ),
            None => return Err(ParseError::schema("$.schema_version", "missing required key")),
        }
        let prompt = match root.get("prompt") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(ParseError::schema("$.prompt", "expected a string")),
        };
        let nodes_v = self.array_field(root, "nodes")?;
        let edges_v = self.array_field(root, "edges")?;

        let mut nodes = Vec::with_capacity(nodes_v.len());
        let mut unplaced = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, nv) in nodes_v.iter().enumerate() {
            let path = format!("$.nodes[{i}]");
            let (node, placed) = self.node(nv, &path)?;
            if !seen.insert(node.id) {
                return Err(ParseError {
                    kind: ParseErrorKind::DuplicateId { id: node.id, path: format!("{path}.id") },
                    message: format!("duplicate node id {}", node.id),
                });
            }
            if !placed {
                unplaced.push(i);
            }
            nodes.push(node);
        }

        let mut edges = Vec::with_capacity(edges_v.len());
        for (i, ev) in edges_v.iter().enumerate() {
            let path = format!("$.edges[{i}]");
            let edge = self.edge(ev, &path)?;
            let endpoint_missing = [&edge.from, &edge.to].into_iter().find(|r| !seen.contains(&r.node)).map(|r| r.node);
            if let Some(id) = endpoint_missing {
                if self.tolerant() {
                    self.note(Rule::EdgeDropped, Severity::Warning, &path, format!("dropped edge to missing node {id}"));
                    continue;
                }
                return Err(ParseError {
                    kind: ParseErrorKind::DanglingEndpoint { id, path },
                    message: format!("edge endpoint {id} is not a node"),
                });
            }
            if edge.from.node == edge.to.node {
                if self.tolerant() {
                    self.note(Rule::EdgeDropped, Severity::Warning, &path, format!("dropped self-loop on node {}", edge.from.node));
                    continue;
                }
                return Err(ParseError {
                    kind: ParseErrorKind::SelfLoop { id: edge.from.node, path },
                    message: format!("edge connects node {} to itself", edge.from.node),
                });
            }
            edges.push(edge);
        }

        if !unplaced.is_empty() {
            let positions = auto_layout_positions(&nodes, &edges);
            for i in unplaced {
                let node = &mut nodes[i];
                node.position = positions[&node.id];
                let msg = format!(
                    "node {} had no position; placed at ({}, {})",
                    node.id, node.position.x, node.position.y
                );
                self.note(Rule::PositionDefaulted, Severity::Info, &format!("$.nodes[{i}].position"), msg);
            }
        }

        Ok(ScriptDocument { schema_version: SCHEMA_VERSION, prompt, nodes, edges })
    }

    fn array_field<'v>(&mut self, root: &'v Map<String, Value>, key: &str) -> Result<&'v [Value], ParseError> {
        let path = format!("$.{key}");
        match root.get(key) {
            Some(Value::Array(items)) => Ok(items),
            Some(_) => Err(ParseError::schema(&path, "expected an array")),
            None if self.tolerant() => {
                self.note(Rule::FieldDefaulted, Severity::Warning, &path, format!("missing `{key}`, assumed empty"));
                Ok(&[])
            }
            None => Err(ParseError::schema(&path, "missing required key")),
        }
    }

    /// Returns the node and whether it carried a position.
    fn node(&mut self, v: &Value, path: &str) -> Result<(ScriptNode, bool), ParseError> {
        let m = self.object(v, path)?;
        self.check_keys(m, &["id", "component", "position", "pins"], path)?;
        let id_v = m.get("id").ok_or_else(|| ParseError::schema(&format!("{path}.id"), "missing required key"))?;
        let id = self.node_id(id_v, &format!("{path}.id"))?;
        let component = self.string(m.get("component"), &format!("{path}.component"))?;
        let (position, placed) = match m.get("position") {
            Some(p) => (self.position(p, &format!("{path}.position"))?, true),
            None if self.tolerant() => (Position::default(), false),
            None => return Err(ParseError::schema(&format!("{path}.position"), "missing required key")),
        };
        let mut pins = BTreeMap::new();
        match m.get("pins") {
            None | Some(Value::Null) => {}
            Some(Value::Object(pm)) => {
                for (port, pv) in pm {
                    let ppath = format!("{path}.pins.{port}");
                    pins.insert(port.clone(), self.pin(pv, &ppath)?);
                }
            }
            Some(_) => return Err(ParseError::schema(&format!("{path}.pins"), "expected an object")),
        }
        Ok((ScriptNode { id, component, position, pins }, placed))
    }

    fn position(&mut self, v: &Value, path: &str) -> Result<Position, ParseError> {
        let m = self.object(v, path)?;
        self.check_keys(m, &["x", "y"], path)?;
        let coord = |me: &mut Self, k: &str| -> Result<f64, ParseError> {
            let p = format!("{path}.{k}");
            let cv = m.get(k).ok_or_else(|| ParseError::schema(&p, "missing required key"))?;
            me.number(cv, &p)
        };
        Ok(Position { x: coord(self, "x")?, y: coord(self, "y")? })
    }

    fn pin(&mut self, v: &Value, path: &str) -> Result<PinnedValue, ParseError> {
        match v {
            Value::Number(_) => Ok(PinnedValue::Number(self.number(v, path)?)),
            Value::String(s) => Ok(PinnedValue::Text(s.clone())),
            Value::Object(m) => {
                self.check_keys(m, &["slider"], path)?;
                let spath = format!("{path}.slider");
                let s = m.get("slider").ok_or_else(|| ParseError::schema(&spath, "missing required key"))?;
                let sm = self.object(s, &spath)?;
                self.check_keys(sm, &["min", "max", "value"], &spath)?;
                let mut field = |k: &str| -> Result<f64, ParseError> {
                    let p = format!("{spath}.{k}");
                    let fv = sm.get(k).ok_or_else(|| ParseError::schema(&p, "missing required key"))?;
                    self.number(fv, &p)
                };
                let (min, max, mut value) = (field("min")?, field("max")?, field("value")?);
                if min > max {
                    return Err(ParseError::schema(&spath, format!("slider min {min} exceeds max {max}")));
                }
                if value < min || value > max {
                    if !self.tolerant() {
                        return Err(ParseError::schema(&spath, format!("slider value {value} outside [{min}, {max}]")));
                    }
                    let clamped = value.clamp(min, max);
                    self.note(
                        Rule::ValueClamped,
                        Severity::Warning,
                        &spath,
                        format!("slider value {value} clamped to {clamped}"),
                    );
                    value = clamped;
                }
                Ok(PinnedValue::Slider { min, max, value })
            }
            _ => Err(ParseError::schema(path, "pin must be a number, a string or a slider object")),
        }
    }

    fn edge(&mut self, v: &Value, path: &str) -> Result<ScriptEdge, ParseError> {
        let m = self.object(v, path)?;
        self.check_keys(m, &["from", "to"], path)?;
        let end = |me: &mut Self, k: &str| -> Result<PortRef, ParseError> {
            let p = format!("{path}.{k}");
            let ev = m.get(k).ok_or_else(|| ParseError::schema(&p, "missing required key"))?;
            let em = me.object(ev, &p)?;
            me.check_keys(em, &["id", "port"], &p)?;
            let idv = em.get("id").ok_or_else(|| ParseError::schema(&format!("{p}.id"), "missing required key"))?;
            let node = me.node_id(idv, &format!("{p}.id"))?;
            let port = me.string(em.get("port"), &format!("{p}.port"))?;
            Ok(PortRef { node, port })
        };
        let from = end(self, "from")?;
        let to = end(self, "to")?;
        Ok(ScriptEdge { from, to })
    }
}
