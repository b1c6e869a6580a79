use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Positive node identifier, unique within one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl NodeId {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Canvas coordinates. Advisory only; evaluation never reads them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

/// A value stored directly on a node port.
#[derive(Debug, Clone, PartialEq)]
pub enum PinnedValue {
    Number(f64),
    Text(String),
    Slider { min: f64, max: f64, value: f64 },
}

impl PinnedValue {
    pub fn to_json(&self) -> Value {
        match self {
            PinnedValue::Number(n) => json!(n),
            PinnedValue::Text(t) => json!(t),
            PinnedValue::Slider { min, max, value } => {
                json!({"slider": {"min": min, "max": max, "value": value}})
            }
        }
    }

    /// The number a pin contributes, if numeric.
    pub fn number(&self) -> Option<f64> {
        match self {
            PinnedValue::Number(n) => Some(*n),
            PinnedValue::Slider { value, .. } => Some(*value),
            PinnedValue::Text(_) => None,
        }
    }

    /// Like [`PinnedValue::number`], but also reads text that parses as a finite number.
    /// Numeric ports accept such text pins.
    pub fn numeric(&self) -> Option<f64> {
        match self {
            PinnedValue::Text(t) => t.trim().parse::<f64>().ok().filter(|x| x.is_finite()),
            other => other.number(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptNode {
    pub id: NodeId,
    /// Component name as written; resolved against the catalog when the graph is built.
    pub component: String,
    pub position: Position,
    /// Port name (as written) to pinned value.
    pub pins: BTreeMap<String, PinnedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub node: NodeId,
    pub port: String,
}

impl PortRef {
    pub fn new(node: u64, port: impl Into<String>) -> Self {
        Self { node: NodeId(node), port: port.into() }
    }
}

/// Directed connection from an output port to an input port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScriptEdge {
    pub from: PortRef,
    pub to: PortRef,
}

impl ScriptEdge {
    pub fn new(from: PortRef, to: PortRef) -> Self {
        Self { from, to }
    }

    /// Canonical ordering key: target first, then source.
    pub fn sort_key(&self) -> (&PortRef, &PortRef) {
        (&self.to, &self.from)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "from": {"id": self.from.node.0, "port": self.from.port},
            "to": {"id": self.to.node.0, "port": self.to.port},
        })
    }
}

/// The wire-level script: every component and every connection, listed separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptDocument {
    pub schema_version: u32,
    pub prompt: Option<String>,
    pub nodes: Vec<ScriptNode>,
    pub edges: Vec<ScriptEdge>,
}

impl Default for ScriptDocument {
    fn default() -> Self {
        Self { schema_version: SCHEMA_VERSION, prompt: None, nodes: Vec::new(), edges: Vec::new() }
    }
}

impl ScriptDocument {
    pub fn node(&self, id: NodeId) -> Option<&ScriptNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut ScriptNode> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    /// Nodes sorted by id, edges by (target, source). The serialised form uses this order.
    pub fn canonical(&self) -> ScriptDocument {
        let mut doc = self.clone();
        doc.nodes.sort_by_key(|n| n.id);
        doc.edges.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        doc
    }

    pub fn next_free_id(&self) -> NodeId {
        NodeId(self.nodes.iter().map(|n| n.id.0).max().unwrap_or(0) + 1)
    }
}
