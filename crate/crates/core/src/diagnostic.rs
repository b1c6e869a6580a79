//! Findings reported by the parsers, the validator and the evaluator, plus the repairs
//! attached to them.

use alloc::format;
use alloc::string::String;
use core::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::graph_ir::{NodeId, PinnedValue, PortRef, ScriptEdge};
use crate::registry::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn name(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

/// Rule identifiers. `R*` are lint rules over a graph, `P*` are repairs made while parsing
/// leniently, `O1` comes from slider overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    UnknownComponent,
    UnknownPort,
    TypeMismatch,
    MissingRequiredInput,
    LostNode,
    SinkStarved,
    DuplicateEdge,
    FenceStripped,
    TrailingComma,
    NumberCoerced,
    KeyIgnored,
    PositionDefaulted,
    EdgeDropped,
    ValueClamped,
    FieldDefaulted,
    OverrideClamped,
}

impl Rule {
    pub const LINT: [Rule; 7] = [
        Rule::UnknownComponent,
        Rule::UnknownPort,
        Rule::TypeMismatch,
        Rule::MissingRequiredInput,
        Rule::LostNode,
        Rule::SinkStarved,
        Rule::DuplicateEdge,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::UnknownComponent => "R1",
            Rule::UnknownPort => "R2",
            Rule::TypeMismatch => "R3",
            Rule::MissingRequiredInput => "R4",
            Rule::LostNode => "R5",
            Rule::SinkStarved => "R6",
            Rule::DuplicateEdge => "R7",
            Rule::FenceStripped => "P1",
            Rule::TrailingComma => "P2",
            Rule::NumberCoerced => "P3",
            Rule::KeyIgnored => "P4",
            Rule::PositionDefaulted => "P5",
            Rule::EdgeDropped => "P6",
            Rule::ValueClamped => "P7",
            Rule::FieldDefaulted => "P8",
            Rule::OverrideClamped => "O1",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Rule::UnknownComponent => "unknown-component",
            Rule::UnknownPort => "unknown-port",
            Rule::TypeMismatch => "type-mismatch",
            Rule::MissingRequiredInput => "missing-required-input",
            Rule::LostNode => "lost-node",
            Rule::SinkStarved => "sink-starved",
            Rule::DuplicateEdge => "duplicate-edge",
            Rule::FenceStripped => "fence-stripped",
            Rule::TrailingComma => "trailing-comma",
            Rule::NumberCoerced => "number-coerced",
            Rule::KeyIgnored => "key-ignored",
            Rule::PositionDefaulted => "position-defaulted",
            Rule::EdgeDropped => "edge-dropped",
            Rule::ValueClamped => "value-clamped",
            Rule::FieldDefaulted => "field-defaulted",
            Rule::OverrideClamped => "override-clamped",
        }
    }

    pub fn from_id(id: &str) -> Option<Rule> {
        [
            Rule::UnknownComponent,
            Rule::UnknownPort,
            Rule::TypeMismatch,
            Rule::MissingRequiredInput,
            Rule::LostNode,
            Rule::SinkStarved,
            Rule::DuplicateEdge,
            Rule::FenceStripped,
            Rule::TrailingComma,
            Rule::NumberCoerced,
            Rule::KeyIgnored,
            Rule::PositionDefaulted,
            Rule::EdgeDropped,
            Rule::ValueClamped,
            Rule::FieldDefaulted,
            Rule::OverrideClamped,
        ]
        .into_iter()
        .find(|r| r.id() == id)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// What a diagnostic points at.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    /// A JSON path inside the raw document (parse-time findings).
    Document { path: String },
    Node { node: NodeId },
    Port { node: NodeId, side: Side, port: String },
    Edge { edge: ScriptEdge },
}

impl Location {
    /// Node used for ordering and display; 0 for document-level findings.
    pub fn node(&self) -> u64 {
        match self {
            Location::Document { .. } => 0,
            Location::Node { node } | Location::Port { node, .. } => node.0,
            Location::Edge { edge } => edge.to.node.0,
        }
    }

    pub fn port(&self) -> Option<&str> {
        match self {
            Location::Port { port, .. } => Some(port),
            Location::Edge { edge } => Some(&edge.to.port),
            _ => None,
        }
    }

    fn key(&self) -> String {
        match self {
            Location::Document { path } => format!("doc:{path}"),
            Location::Node { node } => format!("n{}", node.0),
            Location::Port { node, side, port } => format!("n{}.{}.{}", node.0, side.name(), port),
            Location::Edge { edge } => format!(
                "e{}.{}->{}.{}",
                edge.from.node.0, edge.from.port, edge.to.node.0, edge.to.port
            ),
        }
    }
}

/// Mechanical fix for one diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub enum Repair {
    RenameComponent { node: NodeId, to: String },
    /// Renames a port reference on one node: matching edge endpoints and pin keys.
    RenamePort { node: NodeId, side: Side, from: String, to: String },
    InsertDefault { node: NodeId, port: String, value: PinnedValue },
    DeleteEdge { edge: ScriptEdge },
    RetargetEdge { edge: ScriptEdge, to: PortRef },
}

impl Repair {
    pub fn kind(&self) -> &'static str {
        match self {
            Repair::RenameComponent { .. } => "rename_component",
            Repair::RenamePort { .. } => "rename_port",
            Repair::InsertDefault { .. } => "insert_default",
            Repair::DeleteEdge { .. } => "delete_edge",
            Repair::RetargetEdge { .. } => "retarget_edge",
        }
    }

    pub fn to_json(&self) -> Value {
        use serde_json::json;
        match self {
            Repair::RenameComponent { node, to } => {
                json!({"kind": self.kind(), "node": node.0, "to": to})
            }
            Repair::RenamePort { node, side, from, to } => {
                json!({"kind": self.kind(), "node": node.0, "side": side.name(), "from": from, "to": to})
            }
            Repair::InsertDefault { node, port, value } => {
                json!({"kind": self.kind(), "node": node.0, "port": port, "value": value.to_json()})
            }
            Repair::DeleteEdge { edge } => json!({"kind": self.kind(), "edge": edge.to_json()}),
            Repair::RetargetEdge { edge, to } => json!({
                "kind": self.kind(), "edge": edge.to_json(),
                "to": {"id": to.node.0, "port": to.port},
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub rule: Rule,
    pub severity: Severity,
    pub location: Location,
    pub message: String,
    pub repair: Option<Repair>,
}

impl Diagnostic {
    pub fn new(rule: Rule, severity: Severity, location: Location, message: impl Into<String>) -> Self {
        Self { rule, severity, location, message: message.into(), repair: None }
    }

    pub fn with_repair(mut self, repair: Option<Repair>) -> Self {
        self.repair = repair;
        self
    }

    /// Stable identifier, `<rule>@<location>`; used to select repairs.
    pub fn key(&self) -> String {
        format!("{}@{}", self.rule.id(), self.location.key())
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(DiagnosticJson::from(self)).expect("diagnostic serialises")
    }

    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&DiagnosticJson::from(self)).expect("diagnostic serialises")
    }
}

/// Field order of the diagnostic wire form.
#[derive(Serialize)]
struct DiagnosticJson<'a> {
    rule: &'static str,
    severity: &'static str,
    node: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    port: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge: Option<Value>,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    repair: Option<Value>,
    id: String,
}

impl<'a> From<&'a Diagnostic> for DiagnosticJson<'a> {
    fn from(d: &'a Diagnostic) -> Self {
        let (side, path, edge) = match &d.location {
            Location::Document { path } => (None, Some(path.as_str()), None),
            Location::Port { side, .. } => (Some(side.name()), None, None),
            Location::Edge { edge } => (None, None, Some(edge.to_json())),
            Location::Node { .. } => (None, None, None),
        };
        DiagnosticJson {
            rule: d.rule.id(),
            severity: d.severity.name(),
            node: d.location.node(),
            port: d.location.port(),
            side,
            path,
            edge,
            message: &d.message,
            repair: d.repair.as_ref().map(Repair::to_json),
            id: d.key(),
        }
    }
}

/// Sort order used for every diagnostic list: severity, node, rule, then location.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        a.severity
            .cmp(&b.severity)
            .then(a.location.node().cmp(&b.location.node()))
            .then(a.rule.cmp(&b.rule))
            .then_with(|| a.location.cmp(&b.location))
            .then_with(|| a.message.cmp(&b.message))
    });
}

/// Count of diagnostics with the given rule.
pub fn count_rule(diags: &[Diagnostic], rule: Rule) -> usize {
    diags.iter().filter(|d| d.rule == rule).count()
}

pub fn error_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.is_error()).count()
}
