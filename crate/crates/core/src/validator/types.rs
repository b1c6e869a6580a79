use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph_ir::{PinnedValue, ScriptGraph};
use crate::registry::{with_article, PortKind, Side};

/// Whether a value of kind `src` may flow into a port of kind `dst`.
///
/// Integers and numbers convert both ways (number to integer rounds). Concrete geometry
/// flows into geometry-any ports, and a geometry-any value whose kind could not be inferred
/// is accepted by any geometry port. Points and vectors never convert.
pub fn coerces(src: PortKind, dst: PortKind) -> bool {
    use PortKind::*;
    src == dst
        || matches!((src, dst), (Integer, Number) | (Number, Integer))
        || (dst == GeometryAny && src.is_geometry())
        || (src == GeometryAny && dst.is_geometry())
}

fn concrete_geometry(k: PortKind) -> bool {
    matches!(k, PortKind::Point | PortKind::Curve | PortKind::Surface)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMismatch {
    pub expected: PortKind,
    pub found: PortKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinMismatch {
    pub node: usize,
    pub pin: usize,
    pub message: String,
}

/// Static kind information for a whole graph.
#[derive(Debug, Clone)]
pub struct TypeInfo {
    /// Indexed like `graph.edges()`.
    pub edges: Vec<Option<EdgeMismatch>>,
    /// Effective output kinds per node, aligned with the component's outputs (empty for
    /// placeholder nodes).
    pub outputs: Vec<Vec<PortKind>>,
    pub pins: Vec<PinMismatch>,
}

impl TypeInfo {
    /// Whether any edge entering node `i` is mistyped.
    pub fn node_has_mismatch(&self, graph: &ScriptGraph<'_>, i: usize) -> bool {
        graph.incoming(i).iter().any(|&e| self.edges[e].is_some())
    }

    pub fn first_mismatch(&self, graph: &ScriptGraph<'_>, i: usize) -> Option<&EdgeMismatch> {
        graph.incoming(i).iter().find_map(|&e| self.edges[e].as_ref())
    }
}

/// Infers generic output kinds in topological order and checks every resolved edge and pin.
pub fn check_types(graph: &ScriptGraph<'_>) -> TypeInfo {
    let nodes = graph.nodes();
    let mut info = TypeInfo {
        edges: alloc::vec![None; graph.edges().len()],
        outputs: alloc::vec![Vec::new(); nodes.len()],
        pins: Vec::new(),
    };
    for &i in graph.order() {
        let Some(spec) = nodes[i].spec() else { continue };
        // Kind shared by all geometry-any inputs of this node, set by the first concrete edge.
        let mut established: Option<PortKind> = None;
        for &e in graph.incoming(i) {
            let edge = &graph.edges()[e];
            let (Some(sp), Some(tp)) = (edge.source_port(), edge.target_port()) else { continue };
            let src_spec = nodes[edge.from].spec().expect("source port resolved");
            let pos = src_spec.outputs.iter().position(|p| p.name == sp.name).expect("output of source");
            let found = info.outputs[edge.from][pos];
            if !coerces(found, tp.kind) {
                info.edges[e] = Some(EdgeMismatch {
                    expected: tp.kind,
                    found,
                    message: format!(
                        "{} requires {} input instead of {} (port {} would have required {} instead of {})",
                        spec.canonical_name,
                        with_article(&tp.name.to_lowercase()),
                        found.with_article(),
                        tp.name,
                        tp.kind.with_article(),
                        found.with_article(),
                    ),
                });
                continue;
            }
            if tp.kind == PortKind::GeometryAny && concrete_geometry(found) {
                match established {
                    None => established = Some(found),
                    Some(k) if k != found => {
                        info.edges[e] = Some(EdgeMismatch {
                            expected: k,
                            found,
                            message: format!(
                                "{} cannot combine {} with {} (port {} would have required {} instead of {})",
                                spec.canonical_name,
                                found.with_article(),
                                k.with_article(),
                                tp.name,
                                k.with_article(),
                                found.with_article(),
                            ),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        info.outputs[i] = spec
            .outputs
            .iter()
            .map(|p| if p.kind == PortKind::GeometryAny { established.unwrap_or(PortKind::GeometryAny) } else { p.kind })
            .collect();

        for (pi, pin) in nodes[i].pins.iter().enumerate() {
            let Some(port) = pin.port() else { continue };
            let ok = match &pin.value {
                PinnedValue::Slider { .. } => spec.is_slider() && pin.side == Side::Out,
                PinnedValue::Number(_) => matches!(port.kind, PortKind::Number | PortKind::Integer | PortKind::Text),
                PinnedValue::Text(_) => {
                    port.kind == PortKind::Text
                        || (matches!(port.kind, PortKind::Number | PortKind::Integer) && pin.value.numeric().is_some())
                }
            };
            if !ok {
                let what = match &pin.value {
                    PinnedValue::Slider { .. } => "a slider",
                    PinnedValue::Number(_) => "a number",
                    PinnedValue::Text(_) => "a text",
                };
                info.pins.push(PinMismatch {
                    node: i,
                    pin: pi,
                    message: format!(
                        "{} port {} holds {} value but requires {}",
                        spec.canonical_name,
                        port.name,
                        what,
                        port.kind.with_article()
                    ),
                });
            }
        }
    }
    info
}
