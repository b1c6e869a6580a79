//! Geometry kernel: value types, curves, surfaces, meshes and the per-component
//! evaluation functions.

mod curve;
mod mesh;
mod surface;
mod value;

pub use curve::{clamped_uniform_knots, interpolate, ArcTable, BSpline, Curve, ARC_TABLE_SEGMENTS};
pub use mesh::{Mesh, DEGENERATE_AREA};
pub use surface::Surface;
pub use value::{GeomValue, ValueKind};
pub mod kernel;
