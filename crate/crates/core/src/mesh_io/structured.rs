//! Structured box meshes.
//!
//! Each grid cell is split into six tetrahedra around its main diagonal
//! (Kuhn subdivision), which is conforming across cells. Every tet shares
//! the cell's circumsphere, so `h = ½·|cell diagonal|`.

use crate::error::Result;
use crate::geom::{Aabb, Vec3};

use super::TetMesh;

/// Vertex paths from corner 0 to corner 7 of a unit cell, one per tet.
const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn kuhn_box(bounds: Aabb, cells: [usize; 3]) -> Result<TetMesh> {
    let [nx, ny, nz] = cells;
    let ext = bounds.max - bounds.min;
    let idx = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                // exact endpoints so faces land on the box planes
                let c = |n: usize, t: usize, lo: f64, e: f64, hi: f64| if t == n { hi } else { lo + e * t as f64 / n as f64 };
                vertices.push(Vec3::new(
                    c(nx, i, bounds.min.x, ext.x, bounds.max.x),
                    c(ny, j, bounds.min.y, ext.y, bounds.max.y),
                    c(nz, k, bounds.min.z, ext.z, bounds.max.z),
                ));
            }
        }
    }
    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for path in KUHN {
                    let mut p = [i, j, k];
                    let mut t = [idx(i, j, k); 4];
                    for (step, axis) in path.iter().enumerate() {
                        p[*axis] += 1;
                        t[step + 1] = idx(p[0], p[1], p[2]);
                    }
                    tets.push(t);
                }
            }
        }
    }
    TetMesh::new(vertices, tets)
}

/// Cube-like grid over `bounds` whose cells are as close to `spacing` as the
/// integer cell counts allow (never larger).
pub fn kuhn_box_spacing(bounds: Aabb, spacing: f64) -> Result<TetMesh> {
    let ext = bounds.max - bounds.min;
    let n = |e: f64| ((e / spacing) - 1e-9).ceil().max(1.0) as usize;
    kuhn_box(bounds, [n(ext.x), n(ext.y), n(ext.z)])
}
