//! Lint rules over a resolved graph, and the repairs they suggest.

mod repair;
mod types;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diagnostic::{sort_diagnostics, Diagnostic, Location, Repair, Rule, Severity};
use crate::geometry::GeomValue;
use crate::graph_ir::{GraphNode, PinnedValue, ScriptGraph};
use crate::registry::{Cardinality, ComponentSpec, PortSpec, Resolution, Side};

pub use repair::{apply_repairs, suggest_repairs, RepairError};
pub use types::{check_types, coerces, EdgeMismatch, PinMismatch, TypeInfo};

/// Runs every rule. Output is sorted by severity, then node id, and holds at most one
/// diagnostic per `(rule, location)`.
pub fn validate(graph: &ScriptGraph<'_>) -> Vec<Diagnostic> {
    let types = check_types(graph);
    let mut out = Vec::new();
    unknown_components(graph, &mut out);
    unknown_ports(graph, &mut out);
    type_mismatches(graph, &types, &mut out);
    missing_inputs(graph, &mut out);
    reachability(graph, &types, &mut out);
    duplicate_edges(graph, &mut out);

    let mut seen = BTreeSet::new();
    out.retain(|d| seen.insert(d.key()));
    sort_diagnostics(&mut out);
    out
}

/// Runs only the named rules, keeping the same ordering.
pub fn validate_rules(graph: &ScriptGraph<'_>, rules: &[Rule]) -> Vec<Diagnostic> {
    let mut all = validate(graph);
    all.retain(|d| rules.contains(&d.rule));
    all
}

fn nearest_list<T>(nearest: &[(T, usize)], name: impl Fn(&T) -> String) -> String {
    if nearest.is_empty() {
        return String::new();
    }
    let names: Vec<String> = nearest.iter().map(|(t, _)| name(t)).collect();
    format!("; nearest: {}", names.join(", "))
}

fn unknown_components(graph: &ScriptGraph<'_>, out: &mut Vec<Diagnostic>) {
    for n in graph.nodes() {
        let loc = Location::Node { node: n.id };
        match &n.resolution {
            Resolution::Unknown { nearest } => out.push(Diagnostic::new(
                Rule::UnknownComponent,
                Severity::Error,
                loc,
                format!(
                    "unknown component `{}`{}",
                    n.raw_component,
                    nearest_list(nearest, |c: &&ComponentSpec| c.canonical_name.clone())
                ),
            )),
            Resolution::Fuzzy { item, distance } => out.push(
                Diagnostic::new(
                    Rule::UnknownComponent,
                    Severity::Warning,
                    loc,
                    format!(
                        "component `{}` is not in the catalog; closest match `{}` (edit distance {})",
                        n.raw_component, item.canonical_name, distance
                    ),
                )
                .with_repair(Some(Repair::RenameComponent { node: n.id, to: item.canonical_name.clone() })),
            ),
            Resolution::Exact { item, .. } if n.raw_component != item.canonical_name => out.push(
                Diagnostic::new(
                    Rule::UnknownComponent,
                    Severity::Info,
                    loc,
                    format!("component `{}` is catalogued as `{}`", n.raw_component, item.canonical_name),
                )
                .with_repair(Some(Repair::RenameComponent { node: n.id, to: item.canonical_name.clone() })),
            ),
            Resolution::Exact { .. } => {}
        }
    }
}

fn port_finding(
    node: &GraphNode<'_>,
    side: Side,
    raw: &str,
    res: &Resolution<&PortSpec>,
) -> Option<Diagnostic> {
    let spec = node.spec()?;
    let loc = Location::Port { node: node.id, side, port: raw.to_string() };
    let dir = match side {
        Side::In => "input",
        Side::Out => "output",
    };
    match res {
        Resolution::Exact { .. } => None,
        Resolution::Fuzzy { item, distance } => Some(
            Diagnostic::new(
                Rule::UnknownPort,
                Severity::Warning,
                loc,
                format!(
                    "{} has no {dir} port `{raw}`; closest match `{}` (edit distance {distance})",
                    spec.canonical_name, item.name
                ),
            )
            .with_repair(Some(Repair::RenamePort {
                node: node.id,
                side,
                from: raw.to_string(),
                to: item.name.clone(),
            })),
        ),
        Resolution::Unknown { nearest } => Some(Diagnostic::new(
            Rule::UnknownPort,
            Severity::Error,
            loc,
            format!(
                "{} has no {dir} port `{raw}`{}",
                spec.canonical_name,
                nearest_list(nearest, |p: &&PortSpec| p.name.clone())
            ),
        )),
    }
}

fn unknown_ports(graph: &ScriptGraph<'_>, out: &mut Vec<Diagnostic>) {
    let nodes = graph.nodes();
    for e in graph.edges() {
        if let Some(r) = &e.from_port {
            out.extend(port_finding(&nodes[e.from], Side::Out, &e.edge.from.port, r));
        }
        if let Some(r) = &e.to_port {
            out.extend(port_finding(&nodes[e.to], Side::In, &e.edge.to.port, r));
        }
    }
    for n in nodes {
        for p in &n.pins {
            if let Some(r) = &p.resolution {
                out.extend(port_finding(n, p.side, &p.raw_port, r));
            }
        }
    }
}

fn type_mismatches(graph: &ScriptGraph<'_>, types: &TypeInfo, out: &mut Vec<Diagnostic>) {
    for (e, m) in graph.edges().iter().zip(&types.edges) {
        if let Some(m) = m {
            out.push(
                Diagnostic::new(Rule::TypeMismatch, Severity::Error, Location::Edge { edge: e.edge.clone() }, m.message.clone())
                    .with_repair(Some(Repair::DeleteEdge { edge: e.edge.clone() })),
            );
        }
    }
    for m in &types.pins {
        let node = &graph.nodes()[m.node];
        let pin = &node.pins[m.pin];
        out.push(Diagnostic::new(
            Rule::TypeMismatch,
            Severity::Error,
            Location::Port { node: node.id, side: pin.side, port: pin.raw_port.clone() },
            m.message.clone(),
        ));
    }
}

fn suggested_pin(port: &PortSpec) -> Option<PinnedValue> {
    match port.suggested.as_ref()? {
        GeomValue::Number(x) => Some(PinnedValue::Number(*x)),
        GeomValue::Text(t) => Some(PinnedValue::Text(t.clone())),
        _ => None,
    }
}

fn missing_inputs(graph: &ScriptGraph<'_>, out: &mut Vec<Diagnostic>) {
    for (i, n) in graph.nodes().iter().enumerate() {
        let Some(spec) = n.spec() else { continue };
        if spec.is_params() {
            for p in &spec.outputs {
                if n.pin_for(&p.name).is_none() {
                    out.push(Diagnostic::new(
                        Rule::MissingRequiredInput,
                        Severity::Error,
                        Location::Port { node: n.id, side: Side::Out, port: p.name.clone() },
                        format!("{} has no value for {}", spec.canonical_name, p.name),
                    ));
                }
            }
            continue;
        }
        for p in spec.inputs.iter().filter(|p| p.required) {
            let wired = graph
                .incoming(i)
                .iter()
                .any(|&e| graph.edges()[e].target_port().is_some_and(|t| t.name == p.name));
            if wired || n.pin_for(&p.name).is_some() {
                continue;
            }
            let repair = suggested_pin(p).map(|value| Repair::InsertDefault { node: n.id, port: p.name.clone(), value });
            out.push(
                Diagnostic::new(
                    Rule::MissingRequiredInput,
                    Severity::Error,
                    Location::Port { node: n.id, side: Side::In, port: p.name.clone() },
                    format!("required input {} of {} has no connection and no value", p.name, spec.canonical_name),
                )
                .with_repair(repair),
            );
        }
    }
}

/// Weakly-connected component label per node index.
fn components(graph: &ScriptGraph<'_>) -> Vec<usize> {
    let n = graph.nodes().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in graph.edges() {
        let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

fn reachability(graph: &ScriptGraph<'_>, types: &TypeInfo, out: &mut Vec<Diagnostic>) {
    let nodes = graph.nodes();
    let geometric = |i: usize| types.outputs[i].iter().any(|k| k.is_geometry());
    let drawable_sink = |i: usize| graph.outgoing(i).is_empty() && geometric(i);

    // Reverse search from drawable sinks.
    let mut reaches = alloc::vec![false; nodes.len()];
    let mut stack: Vec<usize> = (0..nodes.len()).filter(|&i| drawable_sink(i)).collect();
    for &i in &stack {
        reaches[i] = true;
    }
    while let Some(i) = stack.pop() {
        for &e in graph.incoming(i) {
            let f = graph.edges()[e].from;
            if !reaches[f] {
                reaches[f] = true;
                stack.push(f);
            }
        }
    }

    let comp = components(graph);
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in comp.iter().enumerate() {
        members.entry(*c).or_default().push(i);
    }
    for group in members.values() {
        if group.iter().any(|&i| geometric(i)) {
            for &i in group.iter().filter(|&&i| !reaches[i]) {
                let n = &nodes[i];
                let name = n.spec().map_or(n.raw_component.as_str(), |s| s.canonical_name.as_str());
                out.push(Diagnostic::new(
                    Rule::LostNode,
                    Severity::Warning,
                    Location::Node { node: n.id },
                    format!("{name} (node {}) never feeds a drawable output", n.id),
                ));
            }
        } else {
            let ids: Vec<String> = group.iter().map(|&i| format!("{}", nodes[i].id)).collect();
            out.push(Diagnostic::new(
                Rule::SinkStarved,
                Severity::Warning,
                Location::Node { node: nodes[group[0]].id },
                format!("subgraph of {} node(s) [{}] produces no geometry", group.len(), ids.join(", ")),
            ));
        }
    }
}

fn duplicate_edges(graph: &ScriptGraph<'_>, out: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for e in graph.edges() {
        let Some(tp) = e.target_port() else { continue };
        if tp.cardinality != Cardinality::Scalar {
            continue;
        }
        if !seen.insert((e.to, tp.name.as_str())) {
            out.push(
                Diagnostic::new(
                    Rule::DuplicateEdge,
                    Severity::Warning,
                    Location::Edge { edge: e.edge.clone() },
                    format!("input {} of node {} already has a connection", tp.name, e.edge.to.node),
                )
                .with_repair(Some(Repair::DeleteEdge { edge: e.edge.clone() })),
            );
        }
    }
}

#[cfg(test)]
mod tests;
