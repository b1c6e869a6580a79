use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::document::{NodeId, Position, ScriptEdge, ScriptNode};

pub const COLUMN_WIDTH: f64 = 220.0;
pub const ROW_HEIGHT: f64 = 120.0;

/// Column = longest-path depth from a source node, row = rank by id within that depth.
///
/// Edges to unknown nodes are ignored. Nodes on a cycle get the depth reached after
/// `nodes.len()` relaxation rounds, so the result is defined for any input.
pub fn auto_layout_positions(nodes: &[ScriptNode], edges: &[ScriptEdge]) -> BTreeMap<NodeId, Position> {
    let mut depth: BTreeMap<NodeId, usize> = nodes.iter().map(|n| (n.id, 0)).collect();
    for _ in 0..nodes.len() {
        let mut changed = false;
        for e in edges {
            let (Some(&d_from), Some(&d_to)) = (depth.get(&e.from.node), depth.get(&e.to.node)) else {
                continue;
            };
            if e.from.node != e.to.node && d_to < d_from + 1 && d_from + 1 < nodes.len() {
                depth.insert(e.to.node, d_from + 1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut rows: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for (id, d) in &depth {
        rows.entry(*d).or_default().push(*id);
    }
    let mut out = BTreeMap::new();
    for (d, ids) in rows {
        for (row, id) in ids.into_iter().enumerate() {
            out.insert(id, Position { x: d as f64 * COLUMN_WIDTH, y: row as f64 * ROW_HEIGHT });
        }
    }
    out
}
