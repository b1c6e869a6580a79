//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and exits non-zero
//! when any criterion fails.
//!
//!     cargo test -p scriptflow --test acceptance

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scriptflow::backend::MockBackend;
use scriptflow::runs::{DIAGNOSTICS_FILE, SCRIPT_FILE, TRANSCRIPT_FILE};
use scriptflow::service::{router, AppState};
use scriptflow_core::geometry::kernel::{eval_divide_curve, eval_nurbs};
use scriptflow_core::geometry::{Curve, GeomValue};
use scriptflow_core::graph_ir::{NodeId, PinnedValue, PortRef, Position, ScriptEdge, ScriptNode};
use scriptflow_core::math::{Point3, Vec3};
use scriptflow_core::registry::{Cardinality, ComponentSpec, PortKind, PortSpec};
use scriptflow_core::validator::coerces;
use scriptflow_core::{
    build_graph, evaluate, parse_document_strict, parse_document_tolerant, serialize, validate, Catalog, EvalResult,
    Location, Rule, ScriptDocument,
};
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

const OFFLINE_CHILD: &str = "--offline-child";
const PROMPTS: [&str; 3] = ["a truss", "an umbrella", "a simple suspension bridge"];

fn main() {
    if std::env::args().any(|a| a == OFFLINE_CHILD) {
        std::process::exit(match offline_child() {
            Ok(s) => {
                println!("{s}");
                0
            }
            Err(e) => {
                println!("{e}");
                1
            }
        });
    }

    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("truss golden", truss_golden),
        ("umbrella golden", umbrella_golden),
        ("bridge golden", bridge_golden),
        ("wire round-trip", wire_round_trip),
        ("validator/evaluator contract", contract),
        ("geometry oracles", geometry_oracles),
        ("registry fuzz", registry_fuzz),
        ("determinism", determinism),
        ("offline", offline),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    let _ = panic::take_hook();
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---- helpers ----

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("scriptflow").chain(args.iter().copied());
    let code = scriptflow::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn generate(prompt: &str, dir: &Path) -> Result<(i32, Value, ScriptDocument), String> {
    let (code, _, err) = cli(&["generate", prompt, "--backend", "mock", "-o", dir.to_str().unwrap()]);
    let transcript: Value = serde_json::from_str(&read(&dir.join(TRANSCRIPT_FILE))?).map_err(|e| e.to_string())?;
    let script = read(&dir.join(SCRIPT_FILE)).map_err(|e| format!("{e} (exit {code}, {err})"))?;
    let doc = parse_document_strict(&script).map_err(|e| e.to_string())?;
    Ok((code, transcript, doc))
}

fn read(p: &Path) -> Result<String, String> {
    std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn rules(transcript: &Value) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for d in transcript["diagnostics"].as_array().into_iter().flatten() {
        *m.entry(d["rule"].as_str().unwrap_or("?").to_string()).or_default() += 1;
    }
    m
}

fn eval_doc(doc: &ScriptDocument) -> EvalResult {
    let catalog = Catalog::builtin();
    let graph = build_graph(doc, &catalog).expect("graph builds");
    evaluate(&graph)
}

fn curves(v: &GeomValue) -> Vec<Curve> {
    v.clone()
        .into_items()
        .into_iter()
        .filter_map(|i| match i {
            GeomValue::Curve(c) => Some(c),
            _ => None,
        })
        .collect()
}

fn node(id: u64, component: &str, pins: &[(&str, PinnedValue)]) -> ScriptNode {
    ScriptNode {
        id: NodeId(id),
        component: component.to_string(),
        position: Position { x: id as f64 * 200.0, y: 0.0 },
        pins: pins.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
    }
}

fn edge(a: u64, ap: &str, b: u64, bp: &str) -> ScriptEdge {
    ScriptEdge::new(PortRef::new(a, ap), PortRef::new(b, bp))
}

fn num(x: f64) -> PinnedValue {
    PinnedValue::Number(x)
}

fn document(nodes: Vec<ScriptNode>, edges: Vec<ScriptEdge>) -> ScriptDocument {
    ScriptDocument { schema_version: 1, prompt: None, nodes, edges }.canonical()
}

// ---- case-study goldens ----

fn truss_golden() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let (code, t, doc) = generate("a truss", dir.path())?;
    let result = eval_doc(&doc);
    let elapsed = start.elapsed();
    ensure!(code == 0, "exit code {code}");
    let r = rules(&t);
    ensure!(r.get("R5") == Some(&1), "expected exactly one R5, got {r:?}");
    for bad in ["R1", "R2", "R3"] {
        ensure!(!r.contains_key(bad), "unexpected {bad} in {r:?}");
    }
    ensure!(result.failures.is_empty(), "failures: {:?}", result.failures);
    let all: Vec<Curve> = result.drawables.iter().flat_map(|(_, v)| curves(v)).collect();
    let polylines = all.iter().filter(|c| matches!(c, Curve::Polyline { .. })).count();
    let lines = all.iter().filter(|c| matches!(c, Curve::Line { .. })).count();
    ensure!(polylines >= 2, "{polylines} polyline drawables");
    ensure!(lines >= 1, "no cross-connection lines");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("1 R5, {polylines} chords, {lines} cross-connections, {} ms", elapsed.as_millis()))
}

fn umbrella_golden() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let (code, t, doc) = generate("an umbrella", dir.path())?;
    let result = eval_doc(&doc);
    let elapsed = start.elapsed();
    ensure!(code == 2, "exit code {code}");
    let failed: Vec<(u64, &str)> =
        result.failures.iter().map(|f| (f.node.get(), doc.node(f.node).unwrap().component.as_str())).collect();
    ensure!(failed == [(15, "Extrude Linear"), (16, "Move")], "failed nodes {failed:?}");
    let messages: Vec<&str> = t["diagnostics"].as_array().unwrap().iter().filter_map(|d| d["message"].as_str()).collect();
    for phrase in ["requires an axis input instead of a number", "would have required a vector instead of a number"] {
        ensure!(messages.iter().any(|m| m.contains(phrase)), "no diagnostic says `{phrase}`: {messages:?}");
    }
    let canopy = result.drawables.iter().any(|(id, v)| id.get() == 14 && matches!(v, GeomValue::Surface(_)));
    let pole = result.drawables.iter().any(|(id, v)| id.get() == 6 && matches!(v, GeomValue::Curve(Curve::Line { .. })));
    ensure!(canopy, "Loft canopy (node 14) is not drawn");
    ensure!(pole, "pole line (node 6) is not drawn");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("nodes 15 and 16 fail, canopy and pole drawn, {} ms", elapsed.as_millis()))
}

fn bridge_golden() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (code, t, doc) = generate("a simple suspension bridge", dir.path())?;
    ensure!(code == 0 || code == 2, "exit code {code}");
    let r = rules(&t);
    let wiring: usize = ["R3", "R4", "R6"].iter().filter_map(|k| r.get(*k)).sum();
    ensure!(wiring >= 3, "{wiring} wiring diagnostics in {r:?}");
    ensure!(r.get("R6").copied().unwrap_or(0) >= 1, "no R6 in {r:?}");
    let result = eval_doc(&doc);
    Ok(format!("{wiring} wiring diagnostics {r:?}, {} failed node(s)", result.failures.len()))
}

// ---- wire format ----

const CHARS: &[char] = &[
    'a', 'q', 'Z', '0', '7', ' ', '-', '_', '"', '\\', '/', '\n', '\t', '\u{1}', '\u{7f}', 'é', 'ß', '中', '🙂', '{', '}',
    '[', ']', ':', ',',
];

fn text(rng: &mut ChaCha8Rng, max: usize) -> String {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| *CHARS.choose(rng).unwrap()).collect()
}

fn word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=6);
    (0..n).map(|_| *b"abcdefghijklmnopqrstuvwxyzABCXYZ".choose(rng).unwrap() as char).collect()
}

fn float(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..5) {
        0 => f64::from(rng.gen_range(-2000..2000)),
        1 => rng.gen_range(-1.0e6..1.0e6),
        2 => 0.1 + 0.2,
        3 => rng.gen::<f64>() * 10f64.powi(rng.gen_range(-300..300)),
        _ => -rng.gen::<f64>(),
    }
}

fn pin(rng: &mut ChaCha8Rng) -> PinnedValue {
    match rng.gen_range(0..3) {
        0 => PinnedValue::Number(float(rng)),
        1 => PinnedValue::Text(text(rng, 10)),
        _ => {
            let min = float(rng);
            let max = min + rng.gen_range(0.0..500.0);
            let value = (min + rng.gen::<f64>() * (max - min)).clamp(min, max);
            PinnedValue::Slider { min, max, value }
        }
    }
}

fn random_document(rng: &mut ChaCha8Rng) -> ScriptDocument {
    let ids: Vec<u64> = (0..rng.gen_range(0..12)).map(|_| rng.gen_range(1..10_000)).collect::<BTreeSet<_>>().into_iter().collect();
    let nodes = ids
        .iter()
        .map(|&id| {
            let component = loop {
                let s = text(rng, 10);
                if !s.trim().is_empty() {
                    break s;
                }
            };
            ScriptNode {
                id: NodeId(id),
                component,
                position: Position { x: float(rng), y: float(rng) },
                pins: (0..rng.gen_range(0..3)).map(|_| (word(rng), pin(rng))).collect(),
            }
        })
        .collect();
    let mut edges = BTreeSet::new();
    if ids.len() >= 2 {
        for _ in 0..rng.gen_range(0..20) {
            let (a, b) = (rng.gen_range(0..ids.len()), rng.gen_range(0..ids.len()));
            if a != b {
                edges.insert(edge(ids[a], &word(rng), ids[b], &word(rng)));
            }
        }
    }
    let prompt = rng.gen_bool(0.7).then(|| text(rng, 20));
    ScriptDocument { schema_version: 1, prompt, nodes, edges: edges.into_iter().collect() }.canonical()
}

fn wire_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5f1);
    for i in 0..1000 {
        let doc = random_document(&mut rng);
        let text = serialize(&doc);
        let strict = parse_document_strict(&text).map_err(|e| format!("document {i}: strict parse failed: {e}\n{text}"))?;
        ensure!(strict == doc, "document {i}: strict parse differs\n{text}");
        let (tolerant, diags) = parse_document_tolerant(&text).map_err(|e| format!("document {i}: tolerant parse failed: {e}"))?;
        ensure!(diags.is_empty(), "document {i}: tolerant parse reported {diags:?}");
        ensure!(tolerant == doc, "document {i}: tolerant parse differs");
        ensure!(serialize(&strict) == text, "document {i}: re-serialization not byte-identical");
    }
    Ok("1000 documents, strict and tolerant parses identical, no diagnostics".into())
}

// ---- validator/evaluator contract ----

/// Ports whose value range can fail evaluation without any lint finding (zero radius,
/// division by zero, non-positive counts, zero vectors). They only take sliders or pins in [2, 6].
fn value_sensitive(comp: &str, port: &PortSpec) -> bool {
    port.kind == PortKind::Integer
        || matches!(
            (comp, port.name.as_str()),
            ("Circle", "Radius") | ("Division", "B") | ("Line SDL", "Length") | ("Unit X" | "Unit Y" | "Unit Z", "Factor") | ("Vector XYZ", _)
        )
}

/// Vector sources with all inputs defaulted would yield a zero vector.
fn always_fed(comp: &str) -> bool {
    matches!(comp, "Vector XYZ" | "Unit X" | "Unit Y" | "Unit Z")
}

/// List ports that fail below two items.
fn needs_two(comp: &str, port: &PortSpec) -> bool {
    port.cardinality == Cardinality::List && matches!(comp, "Polyline" | "Nurbs Curve" | "Interpolate Curve" | "Loft")
}

struct Built {
    spec: ComponentSpec,
    /// Output may be an empty list (Merge, or fed by one).
    maybe_empty: bool,
}

fn random_graph(rng: &mut ChaCha8Rng, catalog: &Catalog) -> ScriptDocument {
    let n = rng.gen_range(2..=12);
    let noisy = rng.gen_bool(0.4);
    let mut built: Vec<Built> = Vec::new();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    while built.len() < n {
        let spec = catalog.components().choose(rng).unwrap().clone();
        let id = built.len() as u64 + 1;
        let name = spec.canonical_name.clone();
        let mut pins = BTreeMap::new();
        let mut new_edges = Vec::new();
        let mut ok = true;
        if spec.is_slider() {
            pins.insert("N".to_string(), PinnedValue::Slider { min: 2.0, max: 6.0, value: f64::from(rng.gen_range(2..=6)) });
        } else if spec.inputs.is_empty() {
            pins.insert(spec.outputs[0].name.clone(), PinnedValue::Text(text(rng, 6)));
        }
        for p in &spec.inputs {
            let sensitive = value_sensitive(&name, p);
            let strict = needs_two(&name, p) || (name == "List Item" && p.name == "List");
            let compatible: Vec<(u64, String)> = built
                .iter()
                .enumerate()
                .flat_map(|(j, b)| b.spec.outputs.iter().map(move |o| (j, b, o)))
                .filter(|(_, _, o)| coerces(o.kind, p.kind))
                .filter(|(_, b, _)| !sensitive || b.spec.is_slider())
                .filter(|(_, b, _)| !strict || !b.maybe_empty)
                .map(|(j, _, o)| (j as u64 + 1, o.name.clone()))
                .collect();
            let wanted = p.required || always_fed(&name) || rng.gen_bool(0.5);
            if noisy && p.required && rng.gen_bool(0.15) {
                continue;
            }
            if !wanted {
                continue;
            }
            let want = if needs_two(&name, p) { rng.gen_range(2..=3) } else { 1 };
            let mut picks: Vec<(u64, String)> = compatible.choose_multiple(rng, want).cloned().collect();
            if needs_two(&name, p) {
                picks.dedup_by_key(|(j, _)| *j);
            }
            if picks.len() >= want.min(2) && !picks.is_empty() && (rng.gen_bool(0.7) || !matches!(p.kind, PortKind::Number | PortKind::Integer)) {
                for (j, port) in picks {
                    new_edges.push(edge(j, &port, id, &p.name));
                }
            } else if matches!(p.kind, PortKind::Number | PortKind::Integer) {
                let x = if sensitive { f64::from(rng.gen_range(2..=6)) } else { f64::from(rng.gen_range(-10..=10)) };
                pins.insert(p.name.clone(), num(x));
            } else if p.required {
                ok = false;
            }
        }
        if noisy && !built.is_empty() && rng.gen_bool(0.5) && !spec.inputs.is_empty() {
            // Deliberate mismatch: an output whose kind cannot feed the chosen input.
            let p = spec.inputs.choose(rng).unwrap();
            let wrong: Vec<(u64, String)> = built
                .iter()
                .enumerate()
                .flat_map(|(j, b)| b.spec.outputs.iter().map(move |o| (j, o)))
                .filter(|(_, o)| !coerces(o.kind, p.kind))
                .map(|(j, o)| (j as u64 + 1, o.name.clone()))
                .collect();
            if let Some((j, port)) = wrong.choose(rng) {
                new_edges.retain(|e: &ScriptEdge| e.to.port != p.name);
                pins.remove(&p.name);
                new_edges.push(edge(*j, port, id, &p.name));
            }
        }
        if !ok && !noisy {
            continue;
        }
        let maybe_empty = name == "Merge" || new_edges.iter().any(|e| built[e.from.node.get() as usize - 1].maybe_empty);
        nodes.push(ScriptNode { pins, ..node(id, &name, &[]) });
        edges.extend(new_edges);
        built.push(Built { spec, maybe_empty });
    }
    document(nodes, edges)
}

fn contract() -> Outcome {
    let catalog = Catalog::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let (mut clean, mut with_r3, mut r3_edges) = (0, 0, 0);
    let mut violations = Vec::new();
    for i in 0..500 {
        let doc = random_graph(&mut rng, &catalog);
        let graph = build_graph(&doc, &catalog).map_err(|e| format!("graph {i} does not build: {e}"))?;
        let diags = validate(&graph);
        let result = evaluate(&graph);
        if !diags.iter().any(|d| d.is_error()) {
            clean += 1;
            if !result.failures.is_empty() {
                violations.push(format!("graph {i}: no errors but failures {:?}\n{}", result.failures, serialize(&doc)));
            }
        }
        let mut saw = false;
        for d in diags.iter().filter(|d| d.rule == Rule::TypeMismatch) {
            let target = match &d.location {
                Location::Edge { edge } => edge.to.node,
                Location::Port { node, .. } | Location::Node { node } => *node,
                Location::Document { .. } => continue,
            };
            saw = true;
            r3_edges += 1;
            if !result.failures.iter().any(|f| f.node == target && f.origin == target) {
                violations.push(format!("graph {i}: R3 at node {target} without a failure originating there\n{}", serialize(&doc)));
            }
        }
        with_r3 += usize::from(saw);
    }
    ensure!(violations.is_empty(), "{} violation(s); first: {}", violations.len(), violations[0]);
    ensure!(clean >= 50 && with_r3 >= 50, "generator coverage too thin: {clean} clean, {with_r3} with R3");
    Ok(format!("500 graphs: {clean} error-free evaluate cleanly, {r3_edges} R3 findings in {with_r3} graphs all fail at the target"))
}

// ---- geometry ----

fn surface_area(doc: &ScriptDocument, id: u64, u: usize, v: usize) -> Result<f64, String> {
    let result = eval_doc(doc);
    match result.drawables.iter().find(|(n, _)| n.get() == id) {
        Some((_, GeomValue::Surface(s))) => Ok(s.sample_mesh(u, v).area()),
        other => Err(format!("node {id} drew {other:?}; failures {:?}", result.failures)),
    }
}

/// Arc position of `q` along a dense polyline.
fn arc_position(dense: &[Point3], cumulative: &[f64], q: Point3) -> f64 {
    let (mut best, mut best_d) = (0.0, f64::INFINITY);
    for i in 0..dense.len() - 1 {
        let ab = dense[i + 1] - dense[i];
        let len2 = ab.dot(ab);
        let t = if len2 > 0.0 { ((q - dense[i]).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let d = q.distance(dense[i] + ab * t);
        if d < best_d {
            best_d = d;
            best = cumulative[i] + t * (cumulative[i + 1] - cumulative[i]);
        }
    }
    best
}

fn division_points(c: &Curve, count: i64) -> Vec<Point3> {
    eval_divide_curve(c, count)
        .unwrap()
        .into_items()
        .into_iter()
        .map(|v| match v {
            GeomValue::Point(p) => p,
            other => panic!("{other:?}"),
        })
        .collect()
}

fn geometry_oracles() -> Outcome {
    let cylinder = document(
        vec![node(1, "Circle", &[("Radius", num(1.0))]), node(2, "Unit Z", &[("Factor", num(2.0))]), node(3, "Extrude Linear", &[])],
        vec![edge(1, "C", 3, "Profile"), edge(2, "V", 3, "Axis")],
    );
    let a = surface_area(&cylinder, 3, 64, 32)?;
    ensure!((a - 4.0 * PI).abs() / (4.0 * PI) < 0.01, "cylinder area {a}");

    let annulus = document(
        vec![node(1, "Circle", &[("Radius", num(1.0))]), node(2, "Circle", &[("Radius", num(2.0))]), node(3, "Loft", &[])],
        vec![edge(1, "C", 3, "Curves"), edge(2, "C", 3, "Curves")],
    );
    let b = surface_area(&annulus, 3, 64, 32)?;
    ensure!((b - 3.0 * PI).abs() / (3.0 * PI) < 0.01, "annulus area {b}");

    let patch = document(
        vec![
            node(1, "Construct Point", &[]),
            node(2, "Construct Point", &[("X", num(3.0))]),
            node(3, "Line", &[]),
            node(4, "Vector XYZ", &[("Z", num(2.0))]),
            node(5, "Extrude Linear", &[]),
        ],
        vec![edge(1, "Pt", 3, "Start"), edge(2, "Pt", 3, "End"), edge(3, "L", 5, "Profile"), edge(4, "V", 5, "Axis")],
    );
    let c = surface_area(&patch, 5, 32, 16)?;
    ensure!((c - 6.0).abs() < 1e-6, "planar patch area {c}");

    let mut rng = ChaCha8Rng::seed_from_u64(0xb5);
    let mut worst_end: f64 = 0.0;
    for _ in 0..100 {
        let control: Vec<Point3> = (0..rng.gen_range(2..12))
            .map(|_| Point3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
            .collect();
        let GeomValue::Curve(curve) = eval_nurbs(&control, rng.gen_range(1..6)).map_err(|e| e.to_string())? else {
            return Err("Nurbs Curve did not yield a curve".into());
        };
        worst_end = worst_end.max(curve.point_at(0.0).distance(control[0])).max(curve.point_at(1.0).distance(*control.last().unwrap()));
    }
    ensure!(worst_end < 1e-9, "B-spline endpoint error {worst_end}");

    let mut worst_chord: f64 = 0.0;
    let line = Curve::Line { a: Point3::new(0.0, 0.0, 0.0), b: Point3::new(7.0, -3.0, 2.0) };
    let circle = Curve::Circle { center: Point3::new(1.0, 2.0, 3.0), normal: Vec3::new(0.0, 1.0, 1.0), radius: 2.5 };
    for (c, count, closed) in [(&line, 9, false), (&circle, 11, true)] {
        let pts = division_points(c, count);
        let chords: Vec<f64> = (0..pts.len() - usize::from(!closed)).map(|i| pts[i].distance(pts[(i + 1) % pts.len()])).collect();
        for ch in &chords {
            worst_chord = worst_chord.max((ch - chords[0]).abs() / chords[0]);
        }
    }
    let control = [(0.0, 0.0, 0.0), (2.0, 6.0, 0.0), (5.0, -3.0, 1.0), (9.0, 4.0, 0.0), (12.0, 0.0, 2.0)].map(|(x, y, z)| Point3::new(x, y, z));
    let GeomValue::Curve(nurbs) = eval_nurbs(&control, 3).map_err(|e| e.to_string())? else {
        return Err("Nurbs Curve did not yield a curve".into());
    };
    let samples = 100_000;
    let dense: Vec<Point3> = (0..=samples).map(|i| nurbs.point_at(i as f64 / samples as f64)).collect();
    let mut cumulative = vec![0.0];
    for w in dense.windows(2) {
        cumulative.push(cumulative.last().unwrap() + w[0].distance(w[1]));
    }
    let count = 7;
    let seg = cumulative.last().unwrap() / count as f64;
    let pos: Vec<f64> = division_points(&nurbs, count).into_iter().map(|q| arc_position(&dense, &cumulative, q)).collect();
    let mut worst_arc: f64 = 0.0;
    for w in pos.windows(2) {
        worst_arc = worst_arc.max(((w[1] - w[0]) - seg).abs() / seg);
    }
    ensure!(worst_chord < 1e-6, "division chord spread {worst_chord:e}");
    ensure!(worst_arc < 1e-6, "NURBS division arc spread {worst_arc:e}");
    Ok(format!(
        "cylinder {:.3}%, annulus {:.3}%, patch {:.1e}, endpoints {worst_end:.1e}, chords {worst_chord:.1e}, arcs {worst_arc:.1e}",
        100.0 * (a - 4.0 * PI).abs() / (4.0 * PI),
        100.0 * (b - 3.0 * PI).abs() / (3.0 * PI),
        (c - 6.0).abs()
    ))
}

// ---- registry ----

fn norm(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace() && *c != '-' && *c != '_').flat_map(char::to_lowercase).collect()
}

fn edit_distance(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut d: Vec<Vec<usize>> = (0..=a.len()).map(|i| (0..=b.len()).map(|j| if i == 0 { j } else if j == 0 { i } else { 0 }).collect()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            d[i][j] = (d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1])).min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn corrupt(rng: &mut ChaCha8Rng, name: &str) -> String {
    let mut s: Vec<char> = name.chars().collect();
    for _ in 0..rng.gen_range(1..=2) {
        let letter = rng.gen_range(b'a'..=b'z') as char;
        match rng.gen_range(0..3) {
            0 => s.insert(rng.gen_range(0..=s.len()), letter),
            1 if s.len() > 1 => {
                s.remove(rng.gen_range(0..s.len()));
            }
            _ => {
                let i = rng.gen_range(0..s.len());
                s[i] = letter;
            }
        }
    }
    s.into_iter().collect()
}

fn registry_fuzz() -> Outcome {
    let catalog = Catalog::builtin();
    let names: Vec<(&str, String)> = catalog
        .components()
        .iter()
        .flat_map(|c| std::iter::once(&c.canonical_name).chain(&c.aliases).map(move |n| (c.canonical_name.as_str(), n.clone())))
        .collect();
    for (owner, n) in &names {
        let got = catalog.resolve_name(n);
        ensure!(got.is_exact() && got.item().map(|c| c.canonical_name.as_str()) == Some(*owner), "`{n}` does not resolve exactly to {owner}");
    }
    let nearest = |comp: &str, raw: &str| {
        names.iter().filter(|(o, _)| *o == comp).map(|(_, n)| edit_distance(&norm(raw), &norm(n))).min().unwrap()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let (mut hits, mut unknown, mut collisions) = (0, 0, 0);
    let mut wrong = Vec::new();
    for _ in 0..1000 {
        let (owner, n) = names.choose(&mut rng).unwrap();
        let raw = corrupt(&mut rng, n);
        match catalog.resolve_name(&raw).item().map(|c| c.canonical_name.as_str()) {
            Some(c) if c == *owner => hits += 1,
            None => unknown += 1,
            Some(other) => {
                // Resolving to a component strictly nearer than the intended one is nearest-match
                // behaviour, not an error; it still counts against the success rate.
                if nearest(other, &raw) < nearest(owner, &raw) {
                    collisions += 1;
                } else {
                    wrong.push(format!("`{raw}` (from `{n}`) -> {other}"));
                }
            }
        }
    }
    let rate = hits as f64 / 1000.0;
    ensure!(wrong.is_empty(), "{} wrong resolution(s): {:?}", wrong.len(), &wrong[..wrong.len().min(5)]);
    ensure!(rate >= 0.95, "success {:.1}% ({unknown} unknown, {collisions} nearer to another component)", rate * 100.0);
    Ok(format!(
        "{} names exact; 1000 corruptions: {:.1}% recovered, {unknown} unknown, {collisions} nearer to another component, 0 wrong",
        names.len(),
        rate * 100.0
    ))
}

// ---- determinism ----

fn determinism() -> Outcome {
    let mut compared = 0;
    for prompt in PROMPTS {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        generate(prompt, a.path())?;
        generate(prompt, b.path())?;
        for f in [TRANSCRIPT_FILE, SCRIPT_FILE, DIAGNOSTICS_FILE] {
            ensure!(read(&a.path().join(f))? == read(&b.path().join(f))?, "{prompt}: {f} differs between runs");
            compared += 1;
        }
    }
    Ok(format!("{compared} artifacts byte-identical across repeated mock runs"))
}

// ---- offline ----

fn offline() -> Outcome {
    use std::os::unix::fs::PermissionsExt;

    let isolated = Command::new("unshare").args(["-rn", "true"]).status().is_ok_and(|s| s.success());
    // The mapped user in the namespace may not be able to traverse the build directory.
    let stage = tempfile::tempdir().unwrap();
    let exe = stage.path().join("acceptance-offline");
    std::fs::copy(std::env::current_exe().map_err(|e| e.to_string())?, &exe).map_err(|e| e.to_string())?;
    std::fs::set_permissions(stage.path(), std::fs::Permissions::from_mode(0o755)).map_err(|e| e.to_string())?;
    let mut cmd = if isolated {
        let mut c = Command::new("unshare");
        c.arg("-rn").arg(&exe);
        c
    } else {
        Command::new(&exe)
    };
    let out = cmd
        .current_dir(stage.path())
        .arg(OFFLINE_CHILD)
        .env_remove("SF_BACKEND")
        .env_remove("SF_MOCK_FALLBACK")
        .env("SF_API_URL", "http://127.0.0.1:9/unreachable")
        .env("SF_ACCEPT_ISOLATED", if isolated { "1" } else { "0" })
        .output()
        .map_err(|e| e.to_string())?;
    let report = String::from_utf8_lossy(&out.stdout).trim().to_string();
    ensure!(out.status.success(), "child failed: {report} {}", String::from_utf8_lossy(&out.stderr));
    if isolated {
        Ok(format!("inside a network namespace with no interfaces up: {report}"))
    } else {
        Ok(format!("no network namespace available; ran with default config and an unreachable API endpoint: {report}"))
    }
}

/// Runs the mock pipeline through the CLI and the HTTP router with default configuration.
fn offline_child() -> Outcome {
    if std::env::var("SF_ACCEPT_ISOLATED").as_deref() == Ok("1") {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
        let reach = std::net::TcpStream::connect_timeout(&listener.local_addr().unwrap(), Duration::from_secs(1));
        ensure!(reach.is_err(), "namespace still routes loopback traffic");
    }
    let mut generated = 0;
    for prompt in PROMPTS {
        let dir = tempfile::tempdir().unwrap();
        let (code, _, err) = cli(&["generate", prompt, "-o", dir.path().to_str().unwrap()]);
        ensure!(code == 0 || code == 2, "{prompt}: exit {code}: {err}");
        ensure!(dir.path().join(SCRIPT_FILE).is_file(), "{prompt}: no script written");
        generated += 1;
    }
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let statuses = rt.block_on(async {
        let config = scriptflow::backend::BackendConfig::from_env().map_err(|e| e.to_string())?;
        ensure!(config.kind == scriptflow::backend::BackendKind::Mock, "default backend is not the mock");
        let app = router(AppState::new(Catalog::builtin(), Arc::new(MockBackend::builtin())));
        let mut statuses = Vec::new();
        for (uri, body) in [
            ("/api/v1/generate", json!({"prompt": "an umbrella"})),
            ("/api/v1/validate", json!({"document": serde_json::from_str::<Value>(scriptflow_core::corpus::BRIDGE_JSON).unwrap()})),
            ("/api/v1/evaluate", json!({"document": serde_json::from_str::<Value>(scriptflow_core::corpus::TRUSS_JSON).unwrap()})),
        ] {
            let req = Request::builder()
                .method(Method::POST)
                .uri(uri)
                .header("content-type", "application/json")
                .body(Body::from(body.to_string()))
                .unwrap();
            let resp = app.clone().oneshot(req).await.map_err(|e| e.to_string())?;
            ensure!(resp.status() == StatusCode::OK, "{uri}: {}", resp.status());
            resp.into_body().collect().await.map_err(|e| e.to_string())?;
            statuses.push(uri);
        }
        Ok::<_, String>(statuses.len())
    })?;
    Ok(format!("{generated} CLI generations and {statuses} HTTP calls succeeded"))
}
