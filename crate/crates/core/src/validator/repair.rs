use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::diagnostic::{Diagnostic, Repair};
use crate::graph_ir::{NodeId, ScriptDocument, ScriptEdge};
use crate::registry::Side;

#[derive(Debug, Clone, PartialEq)]
pub enum RepairError {
    /// Two different repairs touch the same element.
    Conflict { first: Repair, second: Repair },
    /// The repair refers to something the document does not contain.
    NotApplicable { repair: Repair, reason: String },
}

impl fmt::Display for RepairError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepairError::Conflict { first, second } => {
                write!(f, "conflicting repairs: {} and {}", first.to_json(), second.to_json())
            }
            RepairError::NotApplicable { repair, reason } => write!(f, "repair {} not applicable: {reason}", repair.to_json()),
        }
    }
}

impl core::error::Error for RepairError {}

/// The repairs attached to `diags`, without duplicates, in diagnostic order.
pub fn suggest_repairs(diags: &[Diagnostic]) -> Vec<Repair> {
    let mut out: Vec<Repair> = Vec::new();
    for r in diags.iter().filter_map(|d| d.repair.as_ref()) {
        if !out.contains(r) {
            out.push(r.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Target {
    Node(NodeId),
    Port(NodeId, Side, String),
    Pin(NodeId, String),
    Edge(ScriptEdge),
}

fn target(r: &Repair) -> Target {
    match r {
        Repair::RenameComponent { node, .. } => Target::Node(*node),
        Repair::RenamePort { node, side, from, .. } => Target::Port(*node, *side, from.clone()),
        Repair::InsertDefault { node, port, .. } => Target::Pin(*node, port.clone()),
        Repair::DeleteEdge { edge } | Repair::RetargetEdge { edge, .. } => Target::Edge(edge.clone()),
    }
}

/// Applies repairs computed against `doc`. Edge references are matched against the input
/// document, before any rename takes effect. Identical repairs are applied once; different
/// repairs on the same element are rejected.
pub fn apply_repairs(doc: &ScriptDocument, repairs: &[Repair]) -> Result<ScriptDocument, RepairError> {
    let mut by_target: BTreeMap<Target, &Repair> = BTreeMap::new();
    let mut unique: Vec<&Repair> = Vec::new();
    for r in repairs {
        match by_target.get(&target(r)) {
            Some(prev) if *prev == r => continue,
            Some(prev) => return Err(RepairError::Conflict { first: (*prev).clone(), second: r.clone() }),
            None => {
                by_target.insert(target(r), r);
                unique.push(r);
            }
        }
    }

    let not_applicable = |r: &Repair, reason: String| RepairError::NotApplicable { repair: r.clone(), reason };
    let ids: BTreeSet<NodeId> = doc.nodes.iter().map(|n| n.id).collect();
    let mut out = doc.clone();

    // Edge edits first, addressed by original edge index.
    let mut delete = BTreeSet::new();
    for r in &unique {
        match r {
            Repair::DeleteEdge { edge } | Repair::RetargetEdge { edge, .. } => {
                if !doc.edges.contains(edge) {
                    return Err(not_applicable(r, format!("edge {} not found", edge.to_json())));
                }
                if let Repair::RetargetEdge { to, .. } = r {
                    if !ids.contains(&to.node) || to.node == edge.from.node {
                        return Err(not_applicable(r, format!("cannot retarget to node {}", to.node)));
                    }
                    for (i, e) in doc.edges.iter().enumerate() {
                        if e == edge {
                            out.edges[i].to = to.clone();
                        }
                    }
                } else {
                    delete.extend(doc.edges.iter().enumerate().filter(|(_, e)| *e == edge).map(|(i, _)| i));
                }
            }
            _ => {}
        }
    }
    if !delete.is_empty() {
        out.edges = out.edges.into_iter().enumerate().filter(|(i, _)| !delete.contains(i)).map(|(_, e)| e).collect();
    }

    for r in &unique {
        match r {
            Repair::RenameComponent { node, to } => {
                let n = out.node_mut(*node).ok_or_else(|| not_applicable(r, format!("node {node} not found")))?;
                n.component = to.clone();
            }
            Repair::RenamePort { node, side, from, to } => {
                if !ids.contains(node) {
                    return Err(not_applicable(r, format!("node {node} not found")));
                }
                for e in &mut out.edges {
                    let end = match side {
                        Side::In => &mut e.to,
                        Side::Out => &mut e.from,
                    };
                    if end.node == *node && end.port == *from {
                        end.port = to.clone();
                    }
                }
                let n = out.node_mut(*node).expect("node exists");
                if let Some(v) = n.pins.remove(from) {
                    n.pins.insert(to.clone(), v);
                }
            }
            Repair::InsertDefault { node, port, value } => {
                let n = out.node_mut(*node).ok_or_else(|| not_applicable(r, format!("node {node} not found")))?;
                n.pins.insert(port.clone(), value.clone());
            }
            Repair::DeleteEdge { .. } | Repair::RetargetEdge { .. } => {}
        }
    }
    Ok(out)
}
