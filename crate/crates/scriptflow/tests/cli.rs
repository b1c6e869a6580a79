use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(format!("{name}.pscript.json"))
}

fn sf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scriptflow"))
        .args(args)
        .env_remove("SF_BACKEND")
        .env_remove("SF_MOCK_FALLBACK")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_truss_writes_run_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = sf(&["generate", "a truss", "--backend", "mock", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["transcript.json", "script.pscript.json", "diagnostics.jsonl", "timing.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let t: Value = serde_json::from_str(&std::fs::read_to_string(out.join("transcript.json")).unwrap()).unwrap();
    assert_eq!(t["schema_version"], 1);
    assert_eq!(t["stages"].as_array().unwrap().len(), 3);
    let script = std::fs::read_to_string(out.join("script.pscript.json")).unwrap();
    assert!(scriptflow_core::parse_document_strict(&script).is_ok());
}

#[test]
fn generate_without_document_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = sf(&["generate", "lorem ipsum dolor", "--backend", "mock", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(dir.path().join("transcript.json").is_file());
    assert!(!dir.path().join("script.pscript.json").exists());
}

#[test]
fn validate_umbrella_reports_two_type_mismatches() {
    let o = sf(&["validate", fixture("umbrella").to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r3 = v["diagnostics"].as_array().unwrap().iter().filter(|d| d["rule"] == "R3").count();
    assert_eq!(r3, 2);
}

#[test]
fn validate_truss_exits_0() {
    let o = sf(&["validate", fixture("truss").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("R5"));
}

#[test]
fn render_umbrella_obj_contains_canopy() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("umbrella.obj");
    let o = sf(&["render", fixture("umbrella").to_str().unwrap(), "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let obj = std::fs::read_to_string(&path).unwrap();
    // Loft node 14 is the canopy; its 32x16 mesh has up to 2*31*15 faces.
    let canopy = obj.split("o node_").find(|g| g.starts_with("14\n")).expect("canopy group");
    let faces = canopy.lines().filter(|l| l.starts_with("f ")).count();
    assert!(faces > 0 && faces <= 2 * 31 * 15, "{faces}");
    assert!(obj.contains("o node_6\n"), "pole line missing");
}

#[test]
fn render_json_and_bad_extension() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    assert_eq!(sf(&["render", fixture("truss").to_str().unwrap(), "-o", json.to_str().unwrap()]).status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(!v["drawables"].as_array().unwrap().is_empty());
    let bad = dir.path().join("t.stl");
    assert_eq!(sf(&["render", fixture("truss").to_str().unwrap(), "-o", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn eval_with_override_counts_more_drawables() {
    let f = fixture("truss");
    let count = |o: &Output| serde_json::from_str::<Value>(&stdout(o)).unwrap()["drawable_count"].as_u64().unwrap();
    let base = sf(&["eval", f.to_str().unwrap(), "--json"]);
    let more = sf(&["eval", f.to_str().unwrap(), "--json", "--set", "3=8"]);
    assert_eq!(base.status.code(), Some(0));
    assert!(count(&more) > count(&base));
    assert_eq!(sf(&["eval", f.to_str().unwrap(), "--set", "4=8"]).status.code(), Some(1));
    assert_eq!(sf(&["eval", fixture("umbrella").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn repair_fixes_a_misspelling() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.pscript.json");
    let text = std::fs::read_to_string(fixture("truss")).unwrap().replacen("\"Polyline\"", "\"Polylin\"", 1);
    std::fs::write(&src, text).unwrap();
    let out = dir.path().join("fixed.pscript.json");
    let o = sf(&["repair", src.to_str().unwrap(), "-o", out.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["applied"][0]["kind"], "rename_component");
    assert!(std::fs::read_to_string(out).unwrap().matches("\"Polyline\"").count() == 2);
    let unknown = sf(&["repair", src.to_str().unwrap(), "--only", "R1@n99"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn registry_lists_components() {
    let o = sf(&["registry", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["components"].as_array().unwrap().len(), 26);
    assert_eq!(stdout(&sf(&["registry"])).lines().count(), 26);
}

#[test]
fn user_errors_exit_1() {
    assert_eq!(sf(&["validate", "/nonexistent/x.json"]).status.code(), Some(1));
    assert_eq!(sf(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sf(&["generate", "a truss", "--backend", "cloud"]).status.code(), Some(1));
    assert_eq!(sf(&["--help"]).status.code(), Some(0));
}

#[test]
fn custom_catalog_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = scriptflow_core::Catalog::builtin().to_json();
    cat["components"].as_array_mut().unwrap().retain(|c| c["name"] != "Polyline");
    let path = dir.path().join("cat.json");
    std::fs::write(&path, cat.to_string()).unwrap();
    let o = sf(&["validate", fixture("truss").to_str().unwrap(), "--catalog", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("\"R1\""));
}
