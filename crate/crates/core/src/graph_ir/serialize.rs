use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use super::document::{PinnedValue, ScriptDocument};

#[derive(Serialize)]
struct DocWire<'a> {
    schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    prompt: Option<&'a str>,
    nodes: Vec<NodeWire<'a>>,
    edges: Vec<EdgeWire<'a>>,
}

#[derive(Serialize)]
struct NodeWire<'a> {
    id: u64,
    component: &'a str,
    position: PosWire,
    pins: BTreeMap<&'a str, PinWire<'a>>,
}

#[derive(Serialize)]
struct PosWire {
    x: f64,
    y: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum PinWire<'a> {
    Number(f64),
    Text(&'a str),
    Slider { slider: SliderWire },
}

#[derive(Serialize)]
struct SliderWire {
    min: f64,
    max: f64,
    value: f64,
}

#[derive(Serialize)]
struct EdgeWire<'a> {
    from: EndWire<'a>,
    to: EndWire<'a>,
}

#[derive(Serialize)]
struct EndWire<'a> {
    id: u64,
    port: &'a str,
}

/// Canonical text form: fixed key order, nodes by id, edges by (target, source), pins by
/// port name. Compact, no trailing newline.
pub fn serialize(doc: &ScriptDocument) -> String {
    let doc = doc.canonical();
    let wire = DocWire {
        schema_version: doc.schema_version,
        prompt: doc.prompt.as_deref(),
        nodes: doc
            .nodes
            .iter()
            .map(|n| NodeWire {
                id: n.id.0,
                component: &n.component,
                position: PosWire { x: n.position.x, y: n.position.y },
                pins: n
                    .pins
                    .iter()
                    .map(|(k, v)| {
                        let pin = match v {
                            PinnedValue::Number(x) => PinWire::Number(*x),
                            PinnedValue::Text(t) => PinWire::Text(t),
                            PinnedValue::Slider { min, max, value } => {
                                PinWire::Slider { slider: SliderWire { min: *min, max: *max, value: *value } }
                            }
                        };
                        (k.as_str(), pin)
                    })
                    .collect(),
            })
            .collect(),
        edges: doc
            .edges
            .iter()
            .map(|e| EdgeWire {
                from: EndWire { id: e.from.node.0, port: &e.from.port },
                to: EndWire { id: e.to.node.0, port: &e.to.port },
            })
            .collect(),
    };
    serde_json::to_string(&wire).expect("document serialises")
}
