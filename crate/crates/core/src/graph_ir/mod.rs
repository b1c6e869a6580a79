//! Script data model, wire format readers and writer, and the resolved graph.

mod document;
mod graph;
mod layout;
mod parse;
mod serialize;

pub use document::{NodeId, PinnedValue, PortRef, Position, ScriptDocument, ScriptEdge, ScriptNode, SCHEMA_VERSION};
pub use graph::{build_graph, topo_order, GraphEdge, GraphError, GraphNode, GraphPin, ScriptGraph};
pub use layout::{auto_layout_positions, COLUMN_WIDTH, ROW_HEIGHT};
pub use parse::{parse_document_strict, parse_document_tolerant, ParseError, ParseErrorKind};
pub use serialize::serialize;
