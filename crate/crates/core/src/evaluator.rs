//! Runs a graph in topological order with longest-list matching. Failures are values: a
//! failing node yields an error value and only its dependents see it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde_json::{json, Value};

use crate::diagnostic::{Diagnostic, Location, Rule, Severity};
use crate::geometry::kernel::eval_component;
use crate::geometry::GeomValue;
use crate::graph_ir::{GraphNode, NodeId, PinnedValue, ScriptGraph, SCHEMA_VERSION};
use crate::registry::{Cardinality, ComponentSpec, PortKind, PortSpec, Side};
use crate::validator::{check_types, TypeInfo};

/// Mesh resolution used by [`EvalResult::to_json`] unless the caller picks another.
pub const DEFAULT_MESH_U: usize = 32;
pub const DEFAULT_MESH_V: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub node: NodeId,
    /// Node where the error value was first produced.
    pub origin: NodeId,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalResult {
    /// Output values by node id, then canonical output port name.
    pub values: BTreeMap<NodeId, BTreeMap<String, GeomValue>>,
    /// Nodes whose outputs are all error values, in id order.
    pub failures: Vec<Failure>,
    /// Geometry held by nodes without outgoing edges, in id order.
    pub drawables: Vec<(NodeId, GeomValue)>,
    /// Findings from applying overrides.
    pub diagnostics: Vec<Diagnostic>,
}

impl EvalResult {
    pub fn failed_nodes(&self) -> Vec<NodeId> {
        self.failures.iter().map(|f| f.node).collect()
    }

    /// Distinct error origins over all failures, ascending.
    pub fn error_origins(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.failures.iter().map(|f| f.origin).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Geometry items across all drawables, list items counted individually.
    pub fn drawable_count(&self) -> usize {
        self.drawables.iter().map(|(_, v)| v.drawable_count()).sum()
    }

    pub fn value(&self, node: NodeId, port: &str) -> Option<&GeomValue> {
        self.values.get(&node)?.get(port)
    }

    pub fn to_json(&self, u_count: usize, v_count: usize) -> Value {
        let nodes: Vec<Value> = self
            .values
            .iter()
            .map(|(id, outs)| {
                let outputs: serde_json::Map<String, Value> =
                    outs.iter().map(|(k, v)| (k.clone(), v.to_json(u_count, v_count))).collect();
                json!({"id": id.get(), "outputs": outputs})
            })
            .collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "nodes": nodes,
            "failures": self.failures.iter().map(|f| json!({
                "node": f.node.get(), "origin": f.origin.get(), "message": f.message,
            })).collect::<Vec<_>>(),
            "drawables": self.drawables.iter().map(|(id, v)| json!({
                "node": id.get(), "count": v.drawable_count(),
            })).collect::<Vec<_>>(),
            "drawable_count": self.drawable_count(),
            "diagnostics": self.diagnostics.iter().map(Diagnostic::to_json).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OverrideError {
    UnknownNode(NodeId),
    NotASlider(NodeId),
}

impl fmt::Display for OverrideError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverrideError::UnknownNode(id) => write!(f, "override targets missing node {id}"),
            OverrideError::NotASlider(id) => write!(f, "override targets node {id}, which is not a Number Slider"),
        }
    }
}

impl core::error::Error for OverrideError {}

pub fn evaluate(graph: &ScriptGraph<'_>) -> EvalResult {
    run(graph, &BTreeMap::new(), Vec::new())
}

/// Evaluates with slider values replaced. Values outside a slider's range are clamped and
/// reported; the graph itself is not modified.
pub fn evaluate_with_overrides(graph: &ScriptGraph<'_>, overrides: &BTreeMap<NodeId, f64>) -> Result<EvalResult, OverrideError> {
    let mut resolved = BTreeMap::new();
    let mut diags = Vec::new();
    for (&id, &value) in overrides {
        let node = graph.node(id).ok_or(OverrideError::UnknownNode(id))?;
        if !node.spec().is_some_and(ComponentSpec::is_slider) {
            return Err(OverrideError::NotASlider(id));
        }
        let v = match node.pin_for("N") {
            Some(PinnedValue::Slider { min, max, .. }) => {
                let c = value.clamp(*min, *max);
                if c != value {
                    diags.push(Diagnostic::new(
                        Rule::OverrideClamped,
                        Severity::Info,
                        Location::Node { node: id },
                        format!("override {value} for slider {id} clamped to {c}"),
                    ));
                }
                c
            }
            _ => value,
        };
        resolved.insert(id, v);
    }
    Ok(run(graph, &resolved, diags))
}

fn run(graph: &ScriptGraph<'_>, overrides: &BTreeMap<NodeId, f64>, diagnostics: Vec<Diagnostic>) -> EvalResult {
    let types = check_types(graph);
    let nodes = graph.nodes();
    // Output values per node index, aligned with the component's outputs.
    let mut outs: Vec<Vec<GeomValue>> = alloc::vec![Vec::new(); nodes.len()];
    for &i in graph.order() {
        outs[i] = eval_node(graph, &types, &outs, i, overrides);
    }

    let mut result = EvalResult { diagnostics, ..EvalResult::default() };
    for (i, n) in nodes.iter().enumerate() {
        let ports: Vec<&PortSpec> = n.spec().map(|s| s.outputs.iter().collect()).unwrap_or_default();
        let map: BTreeMap<String, GeomValue> = ports.iter().zip(&outs[i]).map(|(p, v)| (p.name.clone(), v.clone())).collect();
        if let Some(GeomValue::Error { origin, message }) = outs[i].iter().find(|v| v.is_error()) {
            if outs[i].iter().all(GeomValue::is_error) {
                result.failures.push(Failure { node: n.id, origin: *origin, message: message.clone() });
            }
        }
        if graph.outgoing(i).is_empty() {
            for v in outs[i].iter().filter(|v| v.is_drawable()) {
                result.drawables.push((n.id, v.clone()));
            }
        }
        result.values.insert(n.id, map);
    }
    result
}

fn fail(node: &GraphNode<'_>, message: impl Into<String>) -> Vec<GeomValue> {
    let count = node.spec().map_or(1, |s| s.outputs.len());
    alloc::vec![GeomValue::error(node.id, message); count]
}

fn eval_node(
    graph: &ScriptGraph<'_>,
    types: &TypeInfo,
    outs: &[Vec<GeomValue>],
    i: usize,
    overrides: &BTreeMap<NodeId, f64>,
) -> Vec<GeomValue> {
    let node = &graph.nodes()[i];
    let Some(spec) = node.spec() else {
        return fail(node, format!("unknown component `{}`", node.raw_component));
    };
    if let Some(m) = types.first_mismatch(graph, i) {
        return fail(node, m.message.clone());
    }
    if let Some(m) = types.pins.iter().find(|m| m.node == i) {
        return fail(node, m.message.clone());
    }
    if spec.is_params() {
        return spec
            .outputs
            .iter()
            .map(|p| params_output(node, spec, p, overrides))
            .collect();
    }

    let mut args = Vec::with_capacity(spec.inputs.len());
    for p in &spec.inputs {
        let gathered = gather(graph, outs, i, p);
        let value = match gathered {
            Some(v) => match v.first_error() {
                Some(GeomValue::Error { origin, message }) => {
                    if p.required {
                        return alloc::vec![GeomValue::error(*origin, message.clone()); spec.outputs.len()];
                    }
                    None
                }
                _ => Some(v),
            },
            None => None,
        };
        let value = match value {
            Some(v) => v,
            None => match (&p.default, p.cardinality) {
                (Some(d), _) => d.clone(),
                (None, Cardinality::List) if !p.required => GeomValue::List(Vec::new()),
                _ => return fail(node, format!("required input {} of {} has no value", p.name, spec.canonical_name)),
            },
        };
        args.push(value);
    }

    match apply_matched(spec, &args) {
        Ok(v) => alloc::vec![v; spec.outputs.len()],
        Err(message) => fail(node, message),
    }
}

fn params_output(node: &GraphNode<'_>, spec: &ComponentSpec, port: &PortSpec, overrides: &BTreeMap<NodeId, f64>) -> GeomValue {
    if let Some(v) = overrides.get(&node.id) {
        return GeomValue::Number(*v);
    }
    match node.pin_for(&port.name) {
        Some(PinnedValue::Slider { value, .. }) => GeomValue::Number(*value),
        Some(PinnedValue::Number(x)) if spec.is_slider() => GeomValue::Number(*x),
        Some(pin @ PinnedValue::Text(_)) if spec.is_slider() => GeomValue::Number(pin.numeric().expect("checked numeric pin")),
        Some(PinnedValue::Number(x)) => GeomValue::Text(format!("{x}")),
        Some(PinnedValue::Text(t)) => GeomValue::Text(t.clone()),
        None => GeomValue::error(node.id, format!("{} has no value for {}", spec.canonical_name, port.name)),
    }
}

/// Value arriving at input port `p` of node `i`: edges first (several edges concatenate in
/// source order), then a pin. `None` when neither exists.
fn gather(graph: &ScriptGraph<'_>, outs: &[Vec<GeomValue>], i: usize, p: &PortSpec) -> Option<GeomValue> {
    let nodes = graph.nodes();
    let mut values = Vec::new();
    for &e in graph.incoming(i) {
        let edge = &graph.edges()[e];
        if edge.target_port().map(|t| t.name.as_str()) != Some(p.name.as_str()) {
            continue;
        }
        let src = &nodes[edge.from];
        let v = match (src.spec(), edge.source_port()) {
            (None, _) => GeomValue::error(src.id, format!("unknown component `{}`", src.raw_component)),
            (Some(spec), Some(sp)) => {
                let pos = spec.outputs.iter().position(|o| o.name == sp.name).expect("resolved output");
                outs[edge.from][pos].clone()
            }
            (Some(_), None) => continue,
        };
        values.push(v);
    }
    match values.len() {
        0 => node_pin(&nodes[i], p),
        1 => values.pop(),
        _ => Some(GeomValue::List(values.into_iter().flat_map(GeomValue::into_items).collect())),
    }
}

fn node_pin(node: &GraphNode<'_>, p: &PortSpec) -> Option<GeomValue> {
    node.pins.iter().find(|pin| pin.side == Side::In && pin.port().is_some_and(|s| s.name == p.name)).map(|pin| {
        match &pin.value {
            PinnedValue::Number(x) => GeomValue::Number(*x),
            PinnedValue::Slider { value, .. } => GeomValue::Number(*value),
            PinnedValue::Text(t) => match pin.value.numeric() {
                Some(x) if p.kind != PortKind::Text => GeomValue::Number(x),
                _ => GeomValue::Text(t.to_string()),
            },
        }
    })
}

/// Longest-list matching over scalar ports that received lists. Shorter lists repeat their
/// last item; an empty list yields an empty output. Outputs that are lists themselves are
/// concatenated. Any failing invocation fails the whole node.
pub fn apply_matched(spec: &ComponentSpec, args: &[GeomValue]) -> Result<GeomValue, String> {
    let mapped: Vec<usize> = spec
        .inputs
        .iter()
        .zip(args)
        .enumerate()
        .filter(|(_, (p, v))| p.cardinality == Cardinality::Scalar && matches!(v, GeomValue::List(_)))
        .map(|(k, _)| k)
        .collect();
    if mapped.is_empty() {
        return eval_component(&spec.canonical_name, args);
    }
    let lens: Vec<usize> = mapped.iter().map(|&k| list_len(&args[k])).collect();
    if lens.contains(&0) {
        return Ok(GeomValue::List(Vec::new()));
    }
    let n = lens.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(n);
    let mut call = args.to_vec();
    for step in 0..n {
        for (&k, &len) in mapped.iter().zip(&lens) {
            let GeomValue::List(items) = &args[k] else { unreachable!() };
            call[k] = items[step.min(len - 1)].clone();
        }
        match eval_component(&spec.canonical_name, &call)? {
            GeomValue::List(items) => out.extend(items),
            v => out.push(v),
        }
    }
    Ok(GeomValue::List(out))
}

fn list_len(v: &GeomValue) -> usize {
    match v {
        GeomValue::List(items) => items.len(),
        _ => 1,
    }
}
