use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{json, Value};

use super::curve::Curve;
use super::surface::Surface;
use crate::graph_ir::NodeId;
use crate::math::{Point3, Vec3};

/// A value flowing along a graph edge.
#[derive(Debug, Clone, PartialEq)]
pub enum GeomValue {
    Number(f64),
    Text(String),
    Point(Point3),
    Vector(Vec3),
    Curve(Curve),
    Surface(Surface),
    /// Flat list; all non-error items share one kind.
    List(Vec<GeomValue>),
    /// Failure marker carrying the node where the failure originated.
    Error { origin: NodeId, message: String },
}

/// Runtime shape of a [`GeomValue`], without list nesting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueKind {
    Number,
    Text,
    Point,
    Vector,
    Curve,
    Surface,
    List,
    Error,
}

impl ValueKind {
    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Number => "number",
            ValueKind::Text => "text",
            ValueKind::Point => "point",
            ValueKind::Vector => "vector",
            ValueKind::Curve => "curve",
            ValueKind::Surface => "surface",
            ValueKind::List => "list",
            ValueKind::Error => "error",
        }
    }
}

impl GeomValue {
    pub fn error(origin: NodeId, message: impl Into<String>) -> Self {
        GeomValue::Error { origin, message: message.into() }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            GeomValue::Number(_) => ValueKind::Number,
            GeomValue::Text(_) => ValueKind::Text,
            GeomValue::Point(_) => ValueKind::Point,
            GeomValue::Vector(_) => ValueKind::Vector,
            GeomValue::Curve(_) => ValueKind::Curve,
            GeomValue::Surface(_) => ValueKind::Surface,
            GeomValue::List(_) => ValueKind::List,
            GeomValue::Error { .. } => ValueKind::Error,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, GeomValue::Error { .. })
    }

    /// First error found in this value or any list item.
    pub fn first_error(&self) -> Option<&GeomValue> {
        match self {
            GeomValue::Error { .. } => Some(self),
            GeomValue::List(items) => items.iter().find_map(|v| v.first_error()),
            _ => None,
        }
    }

    /// Points, curves and surfaces are drawable; lists are drawable when every item is.
    pub fn is_drawable(&self) -> bool {
        match self {
            GeomValue::Point(_) | GeomValue::Curve(_) | GeomValue::Surface(_) => true,
            GeomValue::List(items) => !items.is_empty() && items.iter().all(|v| v.is_drawable()),
            _ => false,
        }
    }

    /// Number of geometry items (list items counted individually).
    pub fn drawable_count(&self) -> usize {
        match self {
            GeomValue::Point(_) | GeomValue::Curve(_) | GeomValue::Surface(_) => 1,
            GeomValue::List(items) => items.iter().map(|v| v.drawable_count()).sum(),
            _ => 0,
        }
    }

    /// Rigid translation of points, curves and surfaces; `None` for other kinds.
    pub fn translated(&self, v: Vec3) -> Option<GeomValue> {
        Some(match self {
            GeomValue::Point(p) => GeomValue::Point(*p + v),
            GeomValue::Curve(c) => GeomValue::Curve(c.translated(v)),
            GeomValue::Surface(s) => GeomValue::Surface(s.translated(v)),
            GeomValue::List(items) => {
                GeomValue::List(items.iter().map(|i| i.translated(v)).collect::<Option<Vec<_>>>()?)
            }
            _ => return None,
        })
    }

    /// Scalar items as a flat list; a non-list value becomes a one-item list.
    pub fn into_items(self) -> Vec<GeomValue> {
        match self {
            GeomValue::List(items) => items,
            other => alloc::vec![other],
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            GeomValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    /// Typed JSON form. Surfaces are meshed at `(u_count, v_count)`.
    pub fn to_json(&self, u_count: usize, v_count: usize) -> Value {
        match self {
            GeomValue::Number(n) => json!({"type": "number", "value": n}),
            GeomValue::Text(t) => json!({"type": "text", "value": t}),
            GeomValue::Point(p) => json!({"type": "point", "x": p.x, "y": p.y, "z": p.z}),
            GeomValue::Vector(v) => json!({"type": "vector", "x": v.x, "y": v.y, "z": v.z}),
            GeomValue::Curve(c) => curve_json(c),
            GeomValue::Surface(s) => {
                let kind = match s {
                    Surface::Extrusion { .. } => "extrusion",
                    Surface::Loft { .. } => "loft",
                };
                json!({"type": "surface", "shape": kind, "mesh": s.sample_mesh(u_count, v_count).to_json()})
            }
            GeomValue::List(items) => json!({
                "type": "list",
                "items": items.iter().map(|i| i.to_json(u_count, v_count)).collect::<Vec<_>>(),
            }),
            GeomValue::Error { origin, message } => {
                json!({"type": "error", "origin": origin.get(), "message": message})
            }
        }
    }

    /// Parses the catalog default notation: a JSON number, a string, or `{"x","y","z"}`
    /// tagged with `"type": "point" | "vector"`.
    pub fn from_default_json(v: &Value) -> Option<GeomValue> {
        match v {
            Value::Number(n) => n.as_f64().map(GeomValue::Number),
            Value::String(s) => Some(GeomValue::Text(s.to_string())),
            Value::Object(m) => {
                let c = |k: &str| m.get(k).and_then(Value::as_f64).unwrap_or(0.0);
                match m.get("type").and_then(Value::as_str) {
                    Some("point") => Some(GeomValue::Point(Point3::new(c("x"), c("y"), c("z")))),
                    Some("vector") => Some(GeomValue::Vector(Vec3::new(c("x"), c("y"), c("z")))),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Inverse of [`GeomValue::from_default_json`] for the kinds it supports.
    pub fn to_default_json(&self) -> Option<Value> {
        match self {
            GeomValue::Number(n) => Some(json!(n)),
            GeomValue::Text(t) => Some(json!(t)),
            GeomValue::Point(p) => Some(json!({"type": "point", "x": p.x, "y": p.y, "z": p.z})),
            GeomValue::Vector(v) => Some(json!({"type": "vector", "x": v.x, "y": v.y, "z": v.z})),
            _ => None,
        }
    }
}

fn point_json(p: &Point3) -> Value {
    json!([p.x, p.y, p.z])
}

fn curve_json(c: &Curve) -> Value {
    match c {
        Curve::Line { a, b } => json!({"type": "curve", "shape": "line", "a": point_json(a), "b": point_json(b)}),
        Curve::Polyline { vertices, closed } => json!({
            "type": "curve", "shape": "polyline", "closed": closed,
            "vertices": vertices.iter().map(point_json).collect::<Vec<_>>(),
        }),
        Curve::Circle { center, normal, radius } => json!({
            "type": "curve", "shape": "circle", "center": point_json(center),
            "normal": [normal.x, normal.y, normal.z], "radius": radius,
        }),
        Curve::Nurbs(b) => {
            // Preview polyline so clients need no spline evaluator.
            let samples: Vec<Value> = (0..=64).map(|i| point_json(&b.point_at(i as f64 / 64.0))).collect();
            json!({
                "type": "curve", "shape": "nurbs", "degree": b.degree(),
                "control": b.control().iter().map(point_json).collect::<Vec<_>>(),
                "samples": samples,
            })
        }
    }
}
