use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::document::{NodeId, PinnedValue, Position, ScriptDocument, ScriptEdge};
use crate::registry::{Catalog, ComponentSpec, PortSpec, Resolution, Side};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    DuplicateId(NodeId),
    DanglingEndpoint { edge: ScriptEdge, id: NodeId },
    SelfLoop(ScriptEdge),
    /// Node ids along one cycle, starting at the smallest id, in edge direction.
    Cycle(Vec<NodeId>),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::DuplicateId(id) => write!(f, "duplicate node id {id}"),
            GraphError::DanglingEndpoint { id, .. } => write!(f, "edge endpoint {id} is not a node"),
            GraphError::SelfLoop(e) => write!(f, "edge connects node {} to itself", e.from.node),
            GraphError::Cycle(ids) => {
                let list: Vec<String> = ids.iter().map(|i| format!("{i}")).collect();
                write!(f, "cycle through nodes {}", list.join(" -> "))
            }
        }
    }
}

impl core::error::Error for GraphError {}

/// A pin with its resolved port (on the input side, or the output side for params nodes).
#[derive(Debug, Clone)]
pub struct GraphPin<'c> {
    pub raw_port: String,
    pub side: Side,
    /// `None` when the node's component is unknown.
    pub resolution: Option<Resolution<&'c PortSpec>>,
    pub value: PinnedValue,
}

impl<'c> GraphPin<'c> {
    pub fn port(&self) -> Option<&'c PortSpec> {
        self.resolution.as_ref().and_then(|r| r.item().copied())
    }
}

#[derive(Debug, Clone)]
pub struct GraphNode<'c> {
    pub id: NodeId,
    pub raw_component: String,
    pub resolution: Resolution<&'c ComponentSpec>,
    pub position: Position,
    pub pins: Vec<GraphPin<'c>>,
}

impl<'c> GraphNode<'c> {
    /// Resolved component; `None` for placeholder nodes.
    pub fn spec(&self) -> Option<&'c ComponentSpec> {
        self.resolution.item().copied()
    }

    /// Pin fed into the given canonical port, if any.
    pub fn pin_for(&self, port: &str) -> Option<&PinnedValue> {
        self.pins.iter().find(|p| p.port().is_some_and(|s| s.name == port)).map(|p| &p.value)
    }
}

#[derive(Debug, Clone)]
pub struct GraphEdge<'c> {
    pub edge: ScriptEdge,
    pub from: usize,
    pub to: usize,
    pub from_port: Option<Resolution<&'c PortSpec>>,
    pub to_port: Option<Resolution<&'c PortSpec>>,
}

impl<'c> GraphEdge<'c> {
    pub fn source_port(&self) -> Option<&'c PortSpec> {
        self.from_port.as_ref().and_then(|r| r.item().copied())
    }

    pub fn target_port(&self) -> Option<&'c PortSpec> {
        self.to_port.as_ref().and_then(|r| r.item().copied())
    }
}

/// A document with names resolved against a catalog and a cached topological order.
#[derive(Debug, Clone)]
pub struct ScriptGraph<'c> {
    catalog: &'c Catalog,
    nodes: Vec<GraphNode<'c>>,
    edges: Vec<GraphEdge<'c>>,
    index: BTreeMap<NodeId, usize>,
    order: Vec<usize>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl<'c> ScriptGraph<'c> {
    pub fn catalog(&self) -> &'c Catalog {
        self.catalog
    }

    /// Nodes sorted by id.
    pub fn nodes(&self) -> &[GraphNode<'c>] {
        &self.nodes
    }

    /// Edges in canonical (target, source) order.
    pub fn edges(&self) -> &[GraphEdge<'c>] {
        &self.edges
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node(&self, id: NodeId) -> Option<&GraphNode<'c>> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    /// Node indices in topological order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Edge indices entering node `i`, in canonical order.
    pub fn incoming(&self, i: usize) -> &[usize] {
        &self.incoming[i]
    }

    pub fn outgoing(&self, i: usize) -> &[usize] {
        &self.outgoing[i]
    }

    /// Reconstructs the source document (canonical order).
    pub fn to_document(&self, prompt: Option<String>) -> ScriptDocument {
        ScriptDocument {
            schema_version: super::SCHEMA_VERSION,
            prompt,
            nodes: self
                .nodes
                .iter()
                .map(|n| super::ScriptNode {
                    id: n.id,
                    component: n.raw_component.clone(),
                    position: n.position,
                    pins: n.pins.iter().map(|p| (p.raw_port.clone(), p.value.clone())).collect(),
                })
                .collect(),
            edges: self.edges.iter().map(|e| e.edge.clone()).collect(),
        }
    }
}

/// Resolves names and checks structure. Unknown components become placeholder nodes whose
/// edges are kept; the validator reports them.
pub fn build_graph<'c>(doc: &ScriptDocument, catalog: &'c Catalog) -> Result<ScriptGraph<'c>, GraphError> {
    let doc = doc.canonical();
    let mut index = BTreeMap::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        if index.insert(n.id, i).is_some() {
            return Err(GraphError::DuplicateId(n.id));
        }
    }
    let nodes: Vec<GraphNode<'c>> = doc
        .nodes
        .iter()
        .map(|n| {
            let resolution = catalog.resolve_name(&n.component);
            let spec = resolution.item().copied();
            let pins = n
                .pins
                .iter()
                .map(|(raw, value)| {
                    let side = if spec.is_some_and(ComponentSpec::is_params) { Side::Out } else { Side::In };
                    GraphPin { raw_port: raw.clone(), side, resolution: spec.map(|s| s.port_of(side, raw)), value: value.clone() }
                })
                .collect();
            GraphNode { id: n.id, raw_component: n.component.clone(), resolution, position: n.position, pins }
        })
        .collect();

    let mut edges = Vec::with_capacity(doc.edges.len());
    let mut incoming = alloc::vec![Vec::new(); nodes.len()];
    let mut outgoing = alloc::vec![Vec::new(); nodes.len()];
    for e in &doc.edges {
        let from = *index.get(&e.from.node).ok_or(GraphError::DanglingEndpoint { edge: e.clone(), id: e.from.node })?;
        let to = *index.get(&e.to.node).ok_or(GraphError::DanglingEndpoint { edge: e.clone(), id: e.to.node })?;
        if from == to {
            return Err(GraphError::SelfLoop(e.clone()));
        }
        incoming[to].push(edges.len());
        outgoing[from].push(edges.len());
        edges.push(GraphEdge {
            edge: e.clone(),
            from,
            to,
            from_port: nodes[from].spec().map(|s| s.port_of(Side::Out, &e.from.port)),
            to_port: nodes[to].spec().map(|s| s.port_of(Side::In, &e.to.port)),
        });
    }

    let order = kahn(nodes.len(), &edges, &incoming, &outgoing).map_err(|stuck| {
        GraphError::Cycle(find_cycle(&stuck, &edges, &incoming).into_iter().map(|i| nodes[i].id).collect())
    })?;
    Ok(ScriptGraph { catalog, nodes, edges, index, order, incoming, outgoing })
}

/// Topological order over node indices (which follow id order), smallest ready index first.
/// On failure returns the nodes that never became ready.
fn kahn(n: usize, edges: &[GraphEdge<'_>], incoming: &[Vec<usize>], outgoing: &[Vec<usize>]) -> Result<Vec<usize>, BTreeSet<usize>> {
    let mut indegree: Vec<usize> = incoming.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &e in &outgoing[i] {
            let t = edges[e].to;
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let done: BTreeSet<usize> = order.into_iter().collect();
        Err((0..n).filter(|i| !done.contains(i)).collect())
    }
}

/// Every stuck node has a stuck predecessor, so walking predecessors must revisit a node.
fn find_cycle(stuck: &BTreeSet<usize>, edges: &[GraphEdge<'_>], incoming: &[Vec<usize>]) -> Vec<usize> {
    let Some(&start) = stuck.first() else { return Vec::new() };
    let mut path = Vec::new();
    let mut seen = BTreeMap::new();
    let mut cur = start;
    while !seen.contains_key(&cur) {
        seen.insert(cur, path.len());
        path.push(cur);
        cur = incoming[cur]
            .iter()
            .map(|&e| edges[e].from)
            .filter(|f| stuck.contains(f))
            .min()
            .expect("stuck node has a stuck predecessor");
    }
    // The walk went against edge direction; reverse to follow it.
    let mut cycle: Vec<usize> = path[seen[&cur]..].iter().rev().copied().collect();
    let min_pos = cycle.iter().enumerate().min_by_key(|(_, &n)| n).map_or(0, |(p, _)| p);
    cycle.rotate_left(min_pos);
    cycle
}

/// Node ids in topological order; ties go to the smaller id.
pub fn topo_order(graph: &ScriptGraph<'_>) -> Vec<NodeId> {
    graph.order.iter().map(|&i| graph.nodes[i].id).collect()
}
