//! Engine for slider-driven dataflow scripts: the component catalog, the JSON wire format,
//! lint rules with repairs, a small geometry kernel and the evaluator.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod corpus;
pub mod diagnostic;
pub mod evaluator;
pub mod geometry;
pub mod graph_ir;
pub mod math;
pub mod registry;
pub mod validator;

pub use diagnostic::{Diagnostic, Location, Repair, Rule, Severity};
pub use evaluator::{evaluate, evaluate_with_overrides, EvalResult};
pub use geometry::GeomValue;
pub use graph_ir::{build_graph, parse_document_strict, parse_document_tolerant, serialize, ScriptDocument, ScriptGraph};
pub use registry::Catalog;
pub use validator::{apply_repairs, suggest_repairs, validate};
