use super::*;
use crate::corpus;
use crate::diagnostic::{count_rule, error_count};
use crate::graph_ir::{build_graph, parse_document_strict, NodeId, ScriptDocument};
use crate::registry::{Catalog, PortKind};
use alloc::vec;

fn diags_of(doc: &ScriptDocument) -> Vec<Diagnostic> {
    let c = Catalog::builtin();
    let g = build_graph(doc, &c).unwrap();
    validate(&g)
}

fn doc(text: &str) -> ScriptDocument {
    parse_document_strict(text).unwrap()
}

const CLEAN_LINE: &str = r#"{"schema_version":1,"nodes":[
    {"id":1,"component":"Number Slider","position":{"x":0,"y":0},"pins":{"N":{"slider":{"min":0,"max":10,"value":4}}}},
    {"id":2,"component":"Construct Point","position":{"x":220,"y":0}},
    {"id":3,"component":"Construct Point","position":{"x":220,"y":120}},
    {"id":4,"component":"Line","position":{"x":440,"y":0}}],
  "edges":[
    {"from":{"id":1,"port":"N"},"to":{"id":2,"port":"X"}},
    {"from":{"id":1,"port":"N"},"to":{"id":3,"port":"Y"}},
    {"from":{"id":2,"port":"Pt"},"to":{"id":4,"port":"Start"}},
    {"from":{"id":3,"port":"Pt"},"to":{"id":4,"port":"End"}}]}"#;

#[test]
fn clean_line_script_has_no_findings() {
    assert_eq!(diags_of(&doc(CLEAN_LINE)), vec![]);
}

#[test]
fn truss_has_one_lost_node() {
    let d = diags_of(&corpus::truss());
    assert_eq!(d.len(), 1, "{d:?}");
    assert_eq!(d[0].rule, Rule::LostNode);
    assert_eq!(d[0].location, Location::Node { node: NodeId(11) });
}

#[test]
fn umbrella_type_mismatches() {
    let d = diags_of(&corpus::umbrella());
    let r3: Vec<&Diagnostic> = d.iter().filter(|d| d.rule == Rule::TypeMismatch).collect();
    assert_eq!(r3.len(), 2);
    assert_eq!(r3[0].location.node(), 15);
    assert_eq!(r3[0].location.port(), Some("Axis"));
    assert!(r3[0].message.contains("requires an axis input instead of a number"));
    assert_eq!(r3[1].location.node(), 16);
    assert!(r3[1].message.contains("would have required a vector instead of a number"));
}

#[test]
fn bridge_findings() {
    let d = diags_of(&corpus::bridge());
    let n = count_rule(&d, Rule::TypeMismatch) + count_rule(&d, Rule::MissingRequiredInput) + count_rule(&d, Rule::SinkStarved);
    assert!(n >= 3, "{d:?}");
    assert_eq!(count_rule(&d, Rule::SinkStarved), 1);
}

#[test]
fn ordered_by_severity_then_node() {
    let d = diags_of(&corpus::bridge());
    assert!(d.windows(2).all(|w| (w[0].severity, w[0].location.node()) <= (w[1].severity, w[1].location.node())));
}

#[test]
fn fuzzy_component_is_warning_with_rename() {
    let text = CLEAN_LINE.replace(r#""component":"Line""#, r#""component":"Lien""#);
    let d = diags_of(&doc(&text));
    assert_eq!(d.len(), 1);
    assert_eq!((d[0].rule, d[0].severity), (Rule::UnknownComponent, Severity::Warning));
    assert_eq!(d[0].repair, Some(Repair::RenameComponent { node: NodeId(4), to: "Line".into() }));
}

#[test]
fn poly_line_renamed_to_polyline() {
    let text = r#"{"schema_version":1,"nodes":[
        {"id":1,"component":"Divide Curve","position":{"x":0,"y":0}},
        {"id":2,"component":"Circle","position":{"x":0,"y":0},"pins":{"Radius":2}},
        {"id":3,"component":"Poly Line","position":{"x":0,"y":0}}],
      "edges":[{"from":{"id":2,"port":"C"},"to":{"id":1,"port":"Curve"}},
               {"from":{"id":1,"port":"Points"},"to":{"id":3,"port":"Vertices"}}]}"#;
    let d = diags_of(&doc(text));
    assert_eq!(suggest_repairs(&d), vec![Repair::RenameComponent { node: NodeId(3), to: "Polyline".into() }]);
}

#[test]
fn unknown_component_is_error_without_repair() {
    let text = CLEAN_LINE.replace(r#""component":"Line""#, r#""component":"Hyperboloid""#);
    let d = diags_of(&doc(&text));
    let r1: Vec<_> = d.iter().filter(|d| d.rule == Rule::UnknownComponent).collect();
    assert_eq!(r1.len(), 1);
    assert!(r1[0].is_error());
    assert!(r1[0].repair.is_none());
}

#[test]
fn port_resolution() {
    let fuzzy = CLEAN_LINE.replace(r#""port":"Start""#, r#""port":"Strat""#);
    let d = diags_of(&doc(&fuzzy));
    assert_eq!(d.len(), 1);
    assert_eq!((d[0].rule, d[0].severity), (Rule::UnknownPort, Severity::Warning));
    assert!(matches!(&d[0].repair, Some(Repair::RenamePort { to, .. }) if to == "Start"));

    let alias = CLEAN_LINE.replace(r#""port":"Start""#, r#""port":"A""#);
    assert!(diags_of(&doc(&alias)).is_empty());

    let unknown = CLEAN_LINE.replace(r#""port":"Start""#, r#""port":"Wobble""#);
    let d = diags_of(&doc(&unknown));
    assert_eq!(count_rule(&d, Rule::UnknownPort), 1);
    // Line.Start is now unfed.
    assert_eq!(count_rule(&d, Rule::MissingRequiredInput), 1);
}

#[test]
fn missing_radius_suggests_default() {
    let text = r#"{"schema_version":1,"nodes":[{"id":1,"component":"Circle","position":{"x":0,"y":0}}],"edges":[]}"#;
    let d = diags_of(&doc(text));
    assert_eq!(d.len(), 1);
    assert_eq!(
        d[0].repair,
        Some(Repair::InsertDefault { node: NodeId(1), port: "Radius".into(), value: PinnedValue::Number(1.0) })
    );
}

#[test]
fn duplicate_edges_into_scalar_port() {
    let text = CLEAN_LINE.replace(
        r#"{"from":{"id":1,"port":"N"},"to":{"id":3,"port":"Y"}}"#,
        r#"{"from":{"id":1,"port":"N"},"to":{"id":3,"port":"Y"}},{"from":{"id":1,"port":"N"},"to":{"id":3,"port":"X"}},{"from":{"id":2,"port":"Pt"},"to":{"id":3,"port":"X"}}"#,
    );
    // Point -> number is also a type error; only the duplicate finding is checked here.
    let d = diags_of(&doc(&text));
    assert_eq!(count_rule(&d, Rule::DuplicateEdge), 1);
}

#[test]
fn orphan_subgraph_reported_once() {
    let text = r#"{"schema_version":1,"nodes":[
        {"id":1,"component":"Number Slider","position":{"x":0,"y":0},"pins":{"N":3}},
        {"id":2,"component":"Negative","position":{"x":0,"y":0}},
        {"id":3,"component":"Addition","position":{"x":0,"y":0}}],
      "edges":[{"from":{"id":1,"port":"N"},"to":{"id":2,"port":"X"}},{"from":{"id":2,"port":"Y"},"to":{"id":3,"port":"A"}}]}"#;
    let d = diags_of(&doc(text));
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].rule, Rule::SinkStarved);
    assert_eq!(d[0].location.node(), 1);
}

#[test]
fn pin_kind_mismatch() {
    let text = r#"{"schema_version":1,"nodes":[{"id":1,"component":"Construct Point","position":{"x":0,"y":0},"pins":{"X":"far"}}],"edges":[]}"#;
    let d = diags_of(&doc(text));
    assert_eq!(count_rule(&d, Rule::TypeMismatch), 1);
}

#[test]
fn merge_of_mixed_kinds() {
    let text = r#"{"schema_version":1,"nodes":[
        {"id":1,"component":"Construct Point","position":{"x":0,"y":0}},
        {"id":2,"component":"Circle","position":{"x":0,"y":0},"pins":{"Radius":1}},
        {"id":3,"component":"Merge","position":{"x":0,"y":0}}],
      "edges":[{"from":{"id":1,"port":"Pt"},"to":{"id":3,"port":"D1"}},{"from":{"id":2,"port":"C"},"to":{"id":3,"port":"D2"}}]}"#;
    let d = diags_of(&doc(text));
    assert_eq!(count_rule(&d, Rule::TypeMismatch), 1);
    let edge = d.iter().find(|d| d.rule == Rule::TypeMismatch).unwrap();
    assert_eq!(edge.location.port(), Some("D2"));
}

#[test]
fn generic_output_takes_input_kind() {
    // Move(point) feeding Line.Start is fine; Move(curve) feeding Line.Start is not.
    let base = r#"{"schema_version":1,"nodes":[
        {"id":1,"component":"SRC","position":{"x":0,"y":0},"pins":{"Radius":1}},
        {"id":2,"component":"Unit Z","position":{"x":0,"y":0}},
        {"id":3,"component":"Move","position":{"x":0,"y":0}},
        {"id":4,"component":"Line","position":{"x":0,"y":0}},
        {"id":5,"component":"Construct Point","position":{"x":0,"y":0}}],
      "edges":[{"from":{"id":1,"port":"OUT"},"to":{"id":3,"port":"Geometry"}},{"from":{"id":2,"port":"V"},"to":{"id":3,"port":"Motion"}},
               {"from":{"id":3,"port":"Geometry"},"to":{"id":4,"port":"Start"}},{"from":{"id":5,"port":"Pt"},"to":{"id":4,"port":"End"}}]}"#;
    let point = base.replace("SRC", "Construct Point").replace(r#""pins":{"Radius":1}"#, r#""pins":{}"#).replace("OUT", "Pt");
    assert!(diags_of(&doc(&point)).is_empty());
    let circle = base.replace("SRC", "Circle").replace("OUT", "C");
    let d = diags_of(&doc(&circle));
    assert_eq!(count_rule(&d, Rule::TypeMismatch), 1);
    assert_eq!(d[0].location.node(), 4);
}

/// Independent table of allowed (output kind, input kind) pairs.
fn allowed(src: PortKind, dst: PortKind) -> bool {
    use PortKind::*;
    let table: &[(PortKind, PortKind)] = &[
        (Number, Number), (Number, Integer), (Integer, Integer), (Integer, Number),
        (Point, Point), (Vector, Vector), (Curve, Curve), (Surface, Surface), (Text, Text),
        (Point, GeometryAny), (Curve, GeometryAny), (Surface, GeometryAny), (GeometryAny, GeometryAny),
        (GeometryAny, Point), (GeometryAny, Curve), (GeometryAny, Surface),
    ];
    table.contains(&(src, dst))
}

#[test]
fn type_check_agrees_with_kind_table_on_catalog_ports() {
    // Wire every output of every catalog component into every input of every other
    // component and compare R3 against the table.
    let c = Catalog::builtin();
    let mut checked = 0;
    for src in c.components() {
        for out in &src.outputs {
            if out.kind == PortKind::GeometryAny {
                continue;
            }
            for dst in c.components() {
                for inp in &dst.inputs {
                    let text = alloc::format!(
                        r#"{{"schema_version":1,"nodes":[
                            {{"id":1,"component":"{}","position":{{"x":0,"y":0}}}},
                            {{"id":2,"component":"{}","position":{{"x":0,"y":0}}}}],
                          "edges":[{{"from":{{"id":1,"port":"{}"}},"to":{{"id":2,"port":"{}"}}}}]}}"#,
                        src.canonical_name, dst.canonical_name, out.name, inp.name
                    );
                    let d = diags_of(&doc(&text));
                    let r3 = count_rule(&d, Rule::TypeMismatch) > 0;
                    assert_eq!(r3, !allowed(out.kind, inp.kind), "{} {} -> {} {}", src.canonical_name, out.name, dst.canonical_name, inp.name);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn kind_pairs_agree_with_table() {
    for a in PortKind::ALL {
        for b in PortKind::ALL {
            assert_eq!(coerces(a, b), allowed(a, b), "{a} -> {b}");
        }
    }
}

#[test]
fn apply_rename_reduces_r1() {
    let text = CLEAN_LINE.replace(r#""component":"Line""#, r#""component":"Lien""#);
    let d0 = doc(&text);
    let before = diags_of(&d0);
    let fixed = apply_repairs(&d0, &suggest_repairs(&before)).unwrap();
    assert_eq!(count_rule(&diags_of(&fixed), Rule::UnknownComponent), count_rule(&before, Rule::UnknownComponent) - 1);
}

#[test]
fn apply_empty_is_identity() {
    let d = corpus::bridge();
    assert_eq!(apply_repairs(&d, &[]).unwrap(), d);
}

#[test]
fn umbrella_delete_edges() {
    let d0 = corpus::umbrella();
    let before = diags_of(&d0);
    let deletes: Vec<Repair> = suggest_repairs(&before).into_iter().filter(|r| r.kind() == "delete_edge").collect();
    assert_eq!(deletes.len(), 2);
    let after = diags_of(&apply_repairs(&d0, &deletes).unwrap());
    assert_eq!(count_rule(&after, Rule::TypeMismatch), 0);
    assert_eq!(count_rule(&after, Rule::MissingRequiredInput), count_rule(&before, Rule::MissingRequiredInput) + 2);
    assert!(error_count(&after) <= error_count(&before));
}

#[test]
fn conflicting_repairs_rejected() {
    let d = doc(CLEAN_LINE);
    let a = Repair::RenameComponent { node: NodeId(4), to: "Line".into() };
    let b = Repair::RenameComponent { node: NodeId(4), to: "Line SDL".into() };
    assert!(matches!(apply_repairs(&d, &[a.clone(), b]), Err(RepairError::Conflict { .. })));
    // Repeating one repair is not a conflict.
    assert!(apply_repairs(&d, &[a.clone(), a]).is_ok());
}

#[test]
fn stale_edge_repair_rejected() {
    let d = doc(CLEAN_LINE);
    let edge = crate::graph_ir::ScriptEdge::new(crate::graph_ir::PortRef::new(9, "X"), crate::graph_ir::PortRef::new(4, "Start"));
    assert!(matches!(apply_repairs(&d, &[Repair::DeleteEdge { edge }]), Err(RepairError::NotApplicable { .. })));
}
