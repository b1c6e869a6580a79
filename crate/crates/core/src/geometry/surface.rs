use alloc::vec::Vec;

use super::curve::Curve;
use super::mesh::Mesh;
use crate::math::{self, Point3, Vec3};

/// Surfaces are kept symbolic and meshed on demand.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    /// `profile(u) + v * direction`.
    Extrusion { profile: Curve, direction: Vec3 },
    /// Ruled between consecutive sections, each sampled at matched arc-length fractions.
    Loft { sections: Vec<Curve> },
}

impl Surface {
    pub fn translated(&self, v: Vec3) -> Surface {
        match self {
            Surface::Extrusion { profile, direction } => Surface::Extrusion {
                profile: profile.translated(v),
                direction: *direction,
            },
            Surface::Loft { sections } => Surface::Loft {
                sections: sections.iter().map(|c| c.translated(v)).collect(),
            },
        }
    }

    /// Point at `(u, v) ∈ [0, 1]²`.
    pub fn point_at(&self, u: f64, v: f64) -> Point3 {
        match self {
            Surface::Extrusion { profile, direction } => {
                profile.points_at_length_fractions(&[u])[0] + *direction * v.clamp(0.0, 1.0)
            }
            Surface::Loft { sections } => {
                let row: Vec<Point3> = sections
                    .iter()
                    .map(|c| c.points_at_length_fractions(&[u])[0])
                    .collect();
                loft_blend(&row, v)
            }
        }
    }

    /// Triangulated `u_count × v_count` vertex grid. Vertex `(i, j)` sits at index
    /// `j * u_count + i`; each grid cell becomes two triangles, zero-area ones are dropped.
    /// Counts below 2 are raised to 2.
    pub fn sample_mesh(&self, u_count: usize, v_count: usize) -> Mesh {
        let (nu, nv) = (u_count.max(2), v_count.max(2));
        let us: Vec<f64> = (0..nu).map(|i| i as f64 / (nu - 1) as f64).collect();
        let vs: Vec<f64> = (0..nv).map(|j| j as f64 / (nv - 1) as f64).collect();
        let mut vertices = Vec::with_capacity(nu * nv);
        match self {
            Surface::Extrusion { profile, direction } => {
                let base = profile.points_at_length_fractions(&us);
                for &v in &vs {
                    vertices.extend(base.iter().map(|&p| p + *direction * v));
                }
            }
            Surface::Loft { sections } => {
                let rows: Vec<Vec<Point3>> =
                    sections.iter().map(|c| c.points_at_length_fractions(&us)).collect();
                for &v in &vs {
                    for i in 0..nu {
                        let column: Vec<Point3> = rows.iter().map(|r| r[i]).collect();
                        vertices.push(loft_blend(&column, v));
                    }
                }
            }
        }
        Mesh::from_grid(vertices, nu, nv)
    }
}

fn loft_blend(column: &[Point3], v: f64) -> Point3 {
    let spans = column.len() - 1;
    let x = v.clamp(0.0, 1.0) * spans as f64;
    let i = (math::floor(x) as usize).min(spans - 1);
    column[i].lerp(column[i + 1], x - i as f64)
}
