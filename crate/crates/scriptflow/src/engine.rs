//! Operations shared by the command line and the HTTP service. Both print the JSON bodies
//! built here, so identical inputs give byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write;

use scriptflow_core::evaluator::{DEFAULT_MESH_U, DEFAULT_MESH_V};
use scriptflow_core::geometry::{Curve, Mesh};
use scriptflow_core::graph_ir::{build_graph, GraphError, NodeId, ParseError, ParseErrorKind, SCHEMA_VERSION};
use scriptflow_core::validator::RepairError;
use scriptflow_core::{
    apply_repairs, evaluate_with_overrides, parse_document_tolerant, serialize, validate, Catalog, Diagnostic, EvalResult, GeomValue,
    Repair, ScriptDocument,
};
use serde_json::{json, Map, Value};

use crate::agents::{run_pipeline, PipelineTranscript};
use crate::backend::Backend;

/// Samples per curve in exported polylines.
pub const CURVE_SAMPLES: usize = 64;

/// A failure with an HTTP status. The CLI maps every one of these to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    pub location: Option<Value>,
}

impl ApiError {
    pub fn new(status: u16, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), location: None }
    }

    pub fn with_location(mut self, location: Value) -> Self {
        self.location = Some(location);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(400, "bad_request", message)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("code".into(), json!(self.code));
        m.insert("message".into(), json!(self.message));
        if let Some(l) = &self.location {
            m.insert("location".into(), l.clone());
        }
        Value::Object(m)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.message, self.code)
    }
}

impl std::error::Error for ApiError {}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        let location = match &e.kind {
            ParseErrorKind::Syntax { offset, line, column } => json!({"offset": offset, "line": line, "column": column}),
            _ => json!({"path": e.path().unwrap_or("$")}),
        };
        ApiError::new(422, "invalid_document", e.to_string()).with_location(location)
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let (code, location) = match &e {
            GraphError::Cycle(ids) => ("cycle", json!({"nodes": ids.iter().map(|i| i.get()).collect::<Vec<_>>()})),
            GraphError::DuplicateId(id) => ("invalid_graph", json!({"node": id.get()})),
            GraphError::DanglingEndpoint { edge, .. } | GraphError::SelfLoop(edge) => ("invalid_graph", json!({"edge": edge.to_json()})),
        };
        ApiError::new(422, code, e.to_string()).with_location(location)
    }
}

/// Response text: compact JSON plus a newline.
pub fn body(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

pub fn document_json(doc: &ScriptDocument) -> Value {
    serde_json::from_str(&serialize(doc)).expect("serialised document is JSON")
}

/// A parsed document with its parse-time and lint findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Checked {
    pub document: ScriptDocument,
    pub diagnostics: Vec<Diagnostic>,
}

impl Checked {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

/// Tolerant parse, graph build and lint. Unrecoverable documents and cycles are errors.
pub fn check(text: &str, catalog: &Catalog) -> Result<Checked, ApiError> {
    let (document, mut diagnostics) = parse_document_tolerant(text)?;
    let graph = build_graph(&document, catalog)?;
    diagnostics.extend(validate(&graph));
    Ok(Checked { document, diagnostics })
}

/// Accepts a document given as a JSON object or as raw text.
pub fn check_value(v: &Value, catalog: &Catalog) -> Result<Checked, ApiError> {
    match v {
        Value::String(s) => check(s, catalog),
        Value::Object(_) => check(&v.to_string(), catalog),
        Value::Null => Err(ApiError::bad_request("missing `document`")),
        _ => Err(ApiError::bad_request("`document` must be an object or a string")),
    }
}

pub fn diagnostics_json(diags: &[Diagnostic]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "diagnostics": diags.iter().map(Diagnostic::to_json).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Repaired {
    pub checked: Checked,
    pub applied: Vec<Repair>,
}

impl Repaired {
    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "document": document_json(&self.checked.document),
            "diagnostics": self.checked.diagnostics.iter().map(Diagnostic::to_json).collect::<Vec<_>>(),
            "applied": self.applied.iter().map(Repair::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Applies the repairs attached to the diagnostics named by `ids` (diagnostic keys), or every
/// suggested repair when `ids` is `None`, then re-checks.
pub fn repair(input: &Checked, ids: Option<&[String]>, catalog: &Catalog) -> Result<Repaired, ApiError> {
    let mut chosen: Vec<Repair> = Vec::new();
    match ids {
        None => chosen = scriptflow_core::suggest_repairs(&input.diagnostics),
        Some(ids) => {
            for id in ids {
                let d = input
                    .diagnostics
                    .iter()
                    .find(|d| &d.key() == id)
                    .ok_or_else(|| ApiError::new(422, "unknown_repair", format!("no diagnostic with key `{id}`")))?;
                let r = d.repair.clone().ok_or_else(|| ApiError::new(422, "no_repair", format!("diagnostic `{id}` has no repair")))?;
                if !chosen.contains(&r) {
                    chosen.push(r);
                }
            }
        }
    }
    let document = apply_repairs(&input.document, &chosen).map_err(|e| match e {
        RepairError::Conflict { .. } => ApiError::new(409, "repair_conflict", e.to_string()),
        RepairError::NotApplicable { .. } => ApiError::new(422, "repair_not_applicable", e.to_string()),
    })?;
    let checked = check(&serialize(&document), catalog)?;
    Ok(Repaired { checked, applied: chosen })
}

/// Parses `{"<id>": value}` slider overrides.
pub fn parse_overrides(v: &Value) -> Result<BTreeMap<NodeId, f64>, ApiError> {
    let mut out = BTreeMap::new();
    match v {
        Value::Null => {}
        Value::Object(m) => {
            for (k, x) in m {
                let id = k.trim().parse::<u64>().map_err(|_| ApiError::bad_request(format!("override key `{k}` is not a node id")))?;
                let x = x.as_f64().ok_or_else(|| ApiError::bad_request(format!("override for node {k} is not a number")))?;
                out.insert(NodeId(id), x);
            }
        }
        _ => return Err(ApiError::bad_request("`overrides` must be an object")),
    }
    Ok(out)
}

pub fn evaluate(doc: &ScriptDocument, overrides: &BTreeMap<NodeId, f64>, catalog: &Catalog) -> Result<EvalResult, ApiError> {
    let graph = build_graph(doc, catalog)?;
    evaluate_with_overrides(&graph, overrides).map_err(|e| ApiError::new(422, "invalid_override", e.to_string()))
}

pub fn eval_json(result: &EvalResult) -> Value {
    result.to_json(DEFAULT_MESH_U, DEFAULT_MESH_V)
}

pub fn registry_json(catalog: &Catalog) -> Value {
    let mut v = catalog.to_json();
    v["schema_version"] = json!(SCHEMA_VERSION);
    v
}

/// Runs the pipeline. A run that ends without a document is a 502 naming the stage.
pub fn generate(prompt: &str, catalog: &Catalog, backend: &dyn Backend) -> Result<PipelineTranscript, ApiError> {
    if prompt.trim().is_empty() {
        return Err(ApiError::new(422, "empty_prompt", "prompt is empty"));
    }
    Ok(run_pipeline(prompt, catalog, backend))
}

pub fn generation_failure(t: &PipelineTranscript) -> ApiError {
    let stage = t.failed_stage();
    ApiError::new(502, "backend_failure", t.error.clone().unwrap_or_else(|| "pipeline produced no document".into()))
        .with_location(json!({"stage": stage}))
}

fn collect_geometry<'a>(v: &'a GeomValue, curves: &mut Vec<&'a Curve>, meshes: &mut Vec<Mesh>, points: &mut Vec<[f64; 3]>, u: usize, w: usize) {
    match v {
        GeomValue::Point(p) => points.push([p.x, p.y, p.z]),
        GeomValue::Curve(c) => curves.push(c),
        GeomValue::Surface(s) => meshes.push(s.sample_mesh(u, w)),
        GeomValue::List(items) => items.iter().for_each(|i| collect_geometry(i, curves, meshes, points, u, w)),
        _ => {}
    }
}

fn curve_points(c: &Curve) -> Vec<[f64; 3]> {
    let pts = match c {
        Curve::Line { a, b } => vec![*a, *b],
        Curve::Polyline { vertices, closed } => {
            let mut v = vertices.clone();
            if *closed && v.len() > 2 {
                v.push(v[0]);
            }
            v
        }
        _ => (0..=CURVE_SAMPLES).map(|i| c.point_at(i as f64 / CURVE_SAMPLES as f64)).collect(),
    };
    pts.iter().map(|p| [p.x, p.y, p.z]).collect()
}

/// Wavefront OBJ of the drawables: surface meshes as faces, curves as `l` polylines, points
/// as `p` elements. One `o` group per drawable node.
pub fn render_obj(result: &EvalResult, u: usize, v: usize) -> String {
    let mut out = String::from("# scriptflow export\n");
    let mut base = 0usize;
    for (id, value) in &result.drawables {
        let (mut curves, mut meshes, mut points) = (Vec::new(), Vec::new(), Vec::new());
        collect_geometry(value, &mut curves, &mut meshes, &mut points, u, v);
        writeln!(out, "o node_{}", id.get()).unwrap();
        for m in &meshes {
            for p in &m.vertices {
                writeln!(out, "v {} {} {}", p.x, p.y, p.z).unwrap();
            }
            for f in &m.faces {
                writeln!(out, "f {} {} {}", base + f[0] as usize + 1, base + f[1] as usize + 1, base + f[2] as usize + 1).unwrap();
            }
            base += m.vertices.len();
        }
        for c in curves {
            let pts = curve_points(c);
            for p in &pts {
                writeln!(out, "v {} {} {}", p[0], p[1], p[2]).unwrap();
            }
            let idx: Vec<String> = (1..=pts.len()).map(|k| (base + k).to_string()).collect();
            writeln!(out, "l {}", idx.join(" ")).unwrap();
            base += pts.len();
        }
        for p in points {
            writeln!(out, "v {} {} {}", p[0], p[1], p[2]).unwrap();
            base += 1;
            writeln!(out, "p {base}").unwrap();
        }
    }
    out
}

/// JSON export: one entry per drawable node with its meshes, sampled curves and points.
pub fn render_json(result: &EvalResult, u: usize, v: usize) -> Value {
    let items: Vec<Value> = result
        .drawables
        .iter()
        .map(|(id, value)| {
            let (mut curves, mut meshes, mut points) = (Vec::new(), Vec::new(), Vec::new());
            collect_geometry(value, &mut curves, &mut meshes, &mut points, u, v);
            json!({
                "node": id.get(),
                "meshes": meshes.iter().map(Mesh::to_json).collect::<Vec<_>>(),
                "curves": curves.iter().map(|c| curve_points(c)).collect::<Vec<_>>(),
                "points": points,
            })
        })
        .collect();
    json!({"schema_version": SCHEMA_VERSION, "drawables": items})
}

#[cfg(test)]
mod tests {
    use super::*;
    use scriptflow_core::corpus;

    #[test]
    fn cycle_is_named() {
        let text = r#"{"schema_version":1,"nodes":[
            {"id":1,"component":"Addition","position":{"x":0,"y":0},"pins":{}},
            {"id":2,"component":"Addition","position":{"x":1,"y":0},"pins":{}}],
          "edges":[{"from":{"id":1,"port":"Result"},"to":{"id":2,"port":"A"}},
                   {"from":{"id":2,"port":"Result"},"to":{"id":1,"port":"A"}}]}"#;
        let e = check(text, &Catalog::builtin()).unwrap_err();
        assert_eq!((e.status, e.code), (422, "cycle"));
        assert_eq!(e.location, Some(json!({"nodes": [1, 2]})));
    }

    #[test]
    fn repair_by_key() {
        let cat = Catalog::builtin();
        let text = serialize(&corpus::truss()).replace("\"Polyline\"", "\"Polylin\"");
        let c = check(&text, &cat).unwrap();
        let key = c.diagnostics.iter().find(|d| d.rule.id() == "R1").unwrap().key();
        let r = repair(&c, Some(&[key]), &cat).unwrap();
        assert_eq!(r.applied.len(), 1);
        assert!(r.checked.diagnostics.len() < c.diagnostics.len());
        let e = repair(&c, Some(&["R9@n1".to_string()]), &cat).unwrap_err();
        assert_eq!(e.status, 422);
    }

    #[test]
    fn overrides_parse() {
        let o = parse_overrides(&json!({"3": 8, " 1 ": 2.5})).unwrap();
        assert_eq!(o[&NodeId(3)], 8.0);
        assert_eq!(o[&NodeId(1)], 2.5);
        assert!(parse_overrides(&json!({"x": 1})).is_err());
        assert!(parse_overrides(&json!([1])).is_err());
    }

    #[test]
    fn obj_has_lines_and_faces() {
        let cat = Catalog::builtin();
        let r = evaluate(&corpus::umbrella(), &BTreeMap::new(), &cat).unwrap();
        let obj = render_obj(&r, 8, 4);
        assert!(obj.lines().any(|l| l.starts_with("f ")));
        assert!(obj.lines().any(|l| l.starts_with("l ")));
        let vertices = obj.lines().filter(|l| l.starts_with("v ")).count();
        for l in obj.lines().filter(|l| l.starts_with("f ") || l.starts_with("l ")) {
            for i in l.split_whitespace().skip(1) {
                let i: usize = i.parse().unwrap();
                assert!(i >= 1 && i <= vertices);
            }
        }
    }
}
