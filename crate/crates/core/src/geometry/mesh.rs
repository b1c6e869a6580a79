use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde_json::{json, Value};

use crate::math::{triangle_area, Point3};

/// Faces with an area at or below this are treated as degenerate and not emitted.
pub const DEGENERATE_AREA: f64 = 1e-15;

/// Triangle mesh used for previews and export.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Point3>,
    /// 0-based vertex indices.
    pub faces: Vec<[u32; 3]>,
}

impl Mesh {
    pub(crate) fn from_grid(vertices: Vec<Point3>, nu: usize, nv: usize) -> Mesh {
        let mut faces = Vec::with_capacity(2 * (nu - 1) * (nv - 1));
        for j in 0..nv - 1 {
            for i in 0..nu - 1 {
                let a = (j * nu + i) as u32;
                let b = a + 1;
                let d = ((j + 1) * nu + i) as u32;
                let c = d + 1;
                for f in [[a, b, c], [a, c, d]] {
                    let [p, q, r] = f.map(|k| vertices[k as usize]);
                    if triangle_area(p, q, r) > DEGENERATE_AREA {
                        faces.push(f);
                    }
                }
            }
        }
        Mesh { vertices, faces }
    }

    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|k| self.vertices[k as usize]);
                triangle_area(a, b, c)
            })
            .sum()
    }

    /// Appends `other`, offsetting its face indices.
    pub fn append(&mut self, other: &Mesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces.extend(other.faces.iter().map(|f| f.map(|k| k + base)));
    }

    /// Wavefront OBJ text: `v x y z` lines, then 1-based `f i j k` lines.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    /// `{"vertices":[[x,y,z],...],"faces":[[i,j,k],...]}` with 0-based faces.
    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices.iter().map(|v| json!([v.x, v.y, v.z])).collect::<Vec<_>>(),
            "faces": self.faces.iter().map(|f| json!([f[0], f[1], f[2]])).collect::<Vec<_>>(),
        })
    }
}
