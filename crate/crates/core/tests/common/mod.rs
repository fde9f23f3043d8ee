#![allow(dead_code)]

use patchvoronoi::geom::{Aabb, Vec3};
use patchvoronoi::mesh_io::structured::kuhn_box;
use patchvoronoi::mesh_io::{PatchedSurface, TetMesh};

pub fn aabb(min: [f64; 3], max: [f64; 3]) -> Aabb {
    Aabb { min: Vec3::from(min), max: Vec3::from(max) }
}

/// Unit squares at z=0 (patch 0) and z=1 (patch 1), `n`×`n` quads each.
pub fn slab(n: usize) -> PatchedSurface {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut labels = Vec::new();
    for (patch, z) in [(0usize, 0.0), (1, 1.0)] {
        let base = vertices.len();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Vec3::new(i as f64 / n as f64, j as f64 / n as f64, z));
            }
        }
        let id = |i: usize, j: usize| base + j * (n + 1) + i;
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if patch == 0 {
                    triangles.push([a, c, b]);
                    triangles.push([a, d, c]);
                } else {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
                labels.extend([patch, patch]);
            }
        }
    }
    PatchedSurface::new(vertices, triangles, labels).unwrap()
}

/// Axis-aligned box surface with one patch per face and outward normals.
/// Patch order: -x, +x, -y, +y, -z, +z.
pub fn box_surface(min: [f64; 3], max: [f64; 3], n: usize) -> PatchedSurface {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut labels = Vec::new();
    for axis in 0..3 {
        for (side, sign) in [(0usize, -1.0f64), (1, 1.0)] {
            let patch = 2 * axis + side;
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            let base = vertices.len();
            for j in 0..=n {
                for i in 0..=n {
                    let mut p = [0.0; 3];
                    p[axis] = if side == 0 { min[axis] } else { max[axis] };
                    p[u] = min[u] + (max[u] - min[u]) * i as f64 / n as f64;
                    p[v] = min[v] + (max[v] - min[v]) * j as f64 / n as f64;
                    vertices.push(Vec3::from(p));
                }
            }
            let id = |i: usize, j: usize| base + j * (n + 1) + i;
            for j in 0..n {
                for i in 0..n {
                    let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                    // (u, v, axis) is right-handed, so counter-clockwise in (u, v) faces +axis
                    if sign > 0.0 {
                        triangles.push([a, b, c]);
                        triangles.push([a, c, d]);
                    } else {
                        triangles.push([a, c, b]);
                        triangles.push([a, d, c]);
                    }
                    labels.extend([patch, patch]);
                }
            }
        }
    }
    PatchedSurface::new(vertices, triangles, labels).unwrap()
}

pub fn unit_cube(n: usize) -> PatchedSurface {
    box_surface([0.0; 3], [1.0; 3], n)
}

/// Small triangles standing in for point generators, one patch each.
pub fn tiny_triangles(centers: &[[f64; 3]], size: f64) -> PatchedSurface {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        let c = Vec3::from(*c);
        vertices.push(c + Vec3::new(size, 0.0, 0.0));
        vertices.push(c + Vec3::new(-0.5 * size, 0.866 * size, 0.0));
        vertices.push(c + Vec3::new(-0.5 * size, -0.866 * size, 0.0));
        triangles.push([3 * k, 3 * k + 1, 3 * k + 2]);
    }
    let labels = (0..centers.len()).collect();
    PatchedSurface::new(vertices, triangles, labels).unwrap()
}

pub const FOUR_POINTS: [[f64; 3]; 4] = [[0.2, 0.25, 0.3], [0.8, 0.3, 0.45], [0.45, 0.8, 0.6], [0.5, 0.45, 0.85]];

/// Slab domain: the squares' footprint plus a margin, z in [0, 1].
pub fn slab_tets(spacing: f64) -> TetMesh {
    let b = aabb([-0.1, -0.1, 0.0], [1.1, 1.1, 1.0]);
    patchvoronoi::mesh_io::structured::kuhn_box_spacing(b, spacing).unwrap()
}

pub fn box_tets(min: [f64; 3], max: [f64; 3], cells: [usize; 3]) -> TetMesh {
    kuhn_box(aabb(min, max), cells).unwrap()
}

use patchvoronoi::geom::triangle_area;
use patchvoronoi::mesh_io::CellComplex;
use rand::Rng;

/// Fan triangulation of every polygon, with the polygon index of each triangle.
pub fn fan_triangles(cc: &CellComplex) -> (Vec<[Vec3; 3]>, Vec<usize>) {
    let mut tris = Vec::new();
    let mut owner = Vec::new();
    for i in 0..cc.len() {
        let p = cc.polygon_points(i);
        for k in 1..p.len().saturating_sub(1) {
            tris.push([p[0], p[k], p[k + 1]]);
            owner.push(i);
        }
    }
    (tris, owner)
}

/// Area-uniform random points on the complex, with the polygon each lies on.
pub fn sample_complex(cc: &CellComplex, n: usize, rng: &mut impl Rng) -> Vec<(Vec3, usize)> {
    let (tris, owner) = fan_triangles(cc);
    let mut cdf = Vec::with_capacity(tris.len());
    let mut total = 0.0;
    for t in &tris {
        total += triangle_area(t[0], t[1], t[2]);
        cdf.push(total);
    }
    (0..n)
        .map(|_| {
            let r = rng.gen::<f64>() * total;
            let k = cdf.partition_point(|c| *c < r).min(tris.len() - 1);
            let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            let [a, b, c] = tris[k];
            (a + (b - a) * u + (c - a) * v, owner[k])
        })
        .collect()
}
