//! Reference scripts for the three case-study prompts, compiled in.

use crate::graph_ir::{parse_document_strict, ScriptDocument};

pub const TRUSS_JSON: &str = include_str!("../fixtures/truss.pscript.json");
pub const UMBRELLA_JSON: &str = include_str!("../fixtures/umbrella.pscript.json");
pub const BRIDGE_JSON: &str = include_str!("../fixtures/bridge.pscript.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseStudy {
    pub name: &'static str,
    pub prompt: &'static str,
    pub json: &'static str,
}

impl CaseStudy {
    pub fn document(&self) -> ScriptDocument {
        parse_document_strict(self.json).expect("fixture parses")
    }
}

pub const CASE_STUDIES: [CaseStudy; 3] = [
    CaseStudy { name: "truss", prompt: "a truss", json: TRUSS_JSON },
    CaseStudy { name: "umbrella", prompt: "an umbrella", json: UMBRELLA_JSON },
    CaseStudy { name: "bridge", prompt: "a simple suspension bridge", json: BRIDGE_JSON },
];

pub fn truss() -> ScriptDocument {
    CASE_STUDIES[0].document()
}

pub fn umbrella() -> ScriptDocument {
    CASE_STUDIES[1].document()
}

pub fn bridge() -> ScriptDocument {
    CASE_STUDIES[2].document()
}
