//! The three-stage pipeline: prompt to design brief, brief to component chain, chain to
//! script document.

mod brief;
mod chain;
mod extract;
pub mod templates;

use std::time::{Duration, Instant};

use scriptflow_core::graph_ir::{build_graph, SCHEMA_VERSION};
use scriptflow_core::{parse_document_tolerant, serialize, validate, Catalog, Diagnostic, ScriptDocument};
use serde_json::{json, Value};

pub use brief::{parse_brief, DesignBrief, InputSpec};
pub use chain::{parse_chain, Binding, ChainStep, ComponentChain, Source};
pub use extract::extract_json;

use crate::backend::{Backend, StageRequest};

pub const MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutput {
    pub stage: u8,
    /// Reply of the last attempt.
    pub raw: String,
    /// JSON form of the parsed structure; present iff extraction succeeded.
    pub parsed: Option<Value>,
    pub notes: String,
    pub attempts: u32,
    /// Findings that did not stop the stage (catalog checks, tolerant-parse repairs).
    pub checks: Vec<String>,
    pub error: Option<String>,
    pub elapsed: Duration,
}

impl StageOutput {
    /// Wire form. Timing is left out so that mock transcripts are byte-identical.
    pub fn to_json(&self) -> Value {
        json!({
            "stage": self.stage,
            "attempts": self.attempts,
            "raw": self.raw,
            "parsed": self.parsed,
            "notes": self.notes,
            "checks": self.checks,
            "error": self.error,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTranscript {
    pub prompt: String,
    pub stages: Vec<StageOutput>,
    pub brief: Option<DesignBrief>,
    pub chain: Option<ComponentChain>,
    pub document: Option<ScriptDocument>,
    /// Tolerant-parse findings followed by the validator's.
    pub diagnostics: Vec<Diagnostic>,
    /// Why the run stopped early, if it did.
    pub error: Option<String>,
}

impl PipelineTranscript {
    /// Stage that stopped the run.
    pub fn failed_stage(&self) -> Option<u8> {
        self.stages.iter().find(|s| s.error.is_some()).map(|s| s.stage)
    }

    pub fn backend_calls(&self) -> u32 {
        self.stages.iter().map(|s| s.attempts).sum()
    }

    pub fn to_json(&self) -> Value {
        let document = self.document.as_ref().map(|d| serde_json::from_str::<Value>(&serialize(d)).expect("serialised document is JSON"));
        json!({
            "schema_version": SCHEMA_VERSION,
            "prompt": self.prompt,
            "stages": self.stages.iter().map(StageOutput::to_json).collect::<Vec<_>>(),
            "document": document,
            "diagnostics": self.diagnostics.iter().map(Diagnostic::to_json).collect::<Vec<_>>(),
            "error": self.error,
        })
    }

    pub fn timing_json(&self) -> Value {
        json!({
            "stages": self.stages.iter().map(|s| json!({"stage": s.stage, "seconds": s.elapsed.as_secs_f64()})).collect::<Vec<_>>(),
            "total_seconds": self.stages.iter().map(|s| s.elapsed.as_secs_f64()).sum::<f64>(),
        })
    }
}

/// Calls the backend up to [`MAX_ATTEMPTS`] times until `parse` accepts the reply. Each retry
/// carries the previous reply and what was wrong with it.
fn run_stage<T>(
    backend: &dyn Backend,
    stage: u8,
    system: &str,
    input: &str,
    parse: impl Fn(&str) -> Result<(T, String, Vec<String>), String>,
    to_json: impl Fn(&T) -> Value,
) -> (StageOutput, Option<T>) {
    let start = Instant::now();
    let mut out = StageOutput {
        stage,
        raw: String::new(),
        parsed: None,
        notes: String::new(),
        attempts: 0,
        checks: Vec::new(),
        error: None,
        elapsed: Duration::ZERO,
    };
    let mut problem = String::new();
    let mut previous_raw = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        out.attempts = attempt;
        let previous = (attempt > 1).then_some((previous_raw.as_str(), problem.as_str()));
        let req = StageRequest { stage, system, input, attempt, previous };
        let result = backend.complete(&req).map_err(|e| e.to_string()).and_then(|raw| {
            out.raw = raw;
            parse(&out.raw)
        });
        match result {
            Ok((value, notes, checks)) => {
                out.parsed = Some(to_json(&value));
                out.notes = notes;
                out.checks = checks;
                out.error = None;
                out.elapsed = start.elapsed();
                return (out, Some(value));
            }
            Err(e) => {
                problem = e;
                previous_raw = out.raw.clone();
            }
        }
    }
    out.error = Some(format!("stage {stage} failed after {MAX_ATTEMPTS} attempts: {problem}"));
    out.elapsed = start.elapsed();
    (out, None)
}

pub fn run_stage1(prompt: &str, backend: &dyn Backend) -> (StageOutput, Option<DesignBrief>) {
    run_stage(
        backend,
        1,
        templates::STAGE1,
        prompt.trim(),
        |raw| parse_brief(raw).map(|(b, notes)| (b, notes, Vec::new())),
        DesignBrief::to_json,
    )
}

pub fn run_stage2(brief: &DesignBrief, catalog: &Catalog, backend: &dyn Backend) -> (StageOutput, Option<ComponentChain>) {
    let system = templates::stage2(catalog);
    run_stage(
        backend,
        2,
        &system,
        &brief.render(),
        |raw| {
            parse_chain(raw).map(|(c, notes)| {
                let checks = c.check(catalog);
                (c, notes, checks)
            })
        },
        ComponentChain::to_json,
    )
}

/// Stage 3 succeeds when the reply holds a JSON object that the tolerant parser accepts and
/// whose graph can be built (unique ids, no cycle).
pub fn run_stage3(
    chain: &ComponentChain,
    catalog: &Catalog,
    backend: &dyn Backend,
) -> (StageOutput, Option<(ScriptDocument, Vec<Diagnostic>)>) {
    run_stage(
        backend,
        3,
        templates::STAGE3,
        &chain.render(),
        |raw| {
            let text = extract_json(raw)?;
            let (doc, diags) = parse_document_tolerant(&text).map_err(|e| e.to_string())?;
            build_graph(&doc, catalog).map_err(|e| e.to_string())?;
            let checks = diags.iter().map(|d| format!("{}: {}", d.rule.id(), d.message)).collect();
            Ok(((doc, diags), String::new(), checks))
        },
        |(doc, _)| serde_json::from_str(&serialize(doc)).expect("serialised document is JSON"),
    )
}

/// Runs the stages in order, stopping at the first that fails, then validates the document.
/// Never fails itself; problems are recorded in the transcript.
pub fn run_pipeline(prompt: &str, catalog: &Catalog, backend: &dyn Backend) -> PipelineTranscript {
    let mut t = PipelineTranscript {
        prompt: prompt.to_string(),
        stages: Vec::new(),
        brief: None,
        chain: None,
        document: None,
        diagnostics: Vec::new(),
        error: None,
    };
    if prompt.trim().is_empty() {
        t.error = Some("prompt is empty".into());
        return t;
    }
    let (s1, brief) = run_stage1(prompt, backend);
    t.stages.push(s1);
    let Some(brief) = brief else {
        t.error = t.stages[0].error.clone();
        return t;
    };
    let (s2, chain) = run_stage2(&brief, catalog, backend);
    t.brief = Some(brief);
    t.stages.push(s2);
    let Some(chain) = chain else {
        t.error = t.stages[1].error.clone();
        return t;
    };
    let (s3, doc) = run_stage3(&chain, catalog, backend);
    t.chain = Some(chain);
    t.stages.push(s3);
    let Some((mut doc, parse_diags)) = doc else {
        t.error = t.stages[2].error.clone();
        return t;
    };
    if doc.prompt.is_none() {
        doc.prompt = Some(prompt.to_string());
    }
    let graph = build_graph(&doc, catalog).expect("stage 3 checked the graph");
    t.diagnostics = parse_diags;
    t.diagnostics.extend(validate(&graph));
    t.document = Some(doc);
    t
}
