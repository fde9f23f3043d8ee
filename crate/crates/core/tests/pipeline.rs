mod common;

use std::collections::BTreeSet;

use common::*;
use patchvoronoi::geom::Vec3;
use patchvoronoi::mesh_io::{CellComplex, PatchedSurface, TetMesh};
use patchvoronoi::pipeline::{filter_organic, OrganicFilter};
use patchvoronoi::spatial_index::closest_point_on_triangle;
use patchvoronoi::{
    compute_medial_axis, compute_offset, compute_voronoi, PipelineConfig, Product, TagKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exhaustive distance from `p` to each patch.
fn patch_distances(s: &PatchedSurface, p: Vec3) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; s.patch_count()];
    for t in 0..s.triangles.len() {
        let q = closest_point_on_triangle(p, s.triangle(t)).0;
        let k = s.patch_of_triangle[t];
        d[k] = d[k].min(q.distance(p));
    }
    d
}

fn label_pairs(cc: &CellComplex) -> BTreeSet<(usize, usize)> {
    cc.polygon_labels.iter().map(|(a, b)| (a.patch, b.patch)).collect()
}

fn assert_real_pairs(cc: &CellComplex) {
    for (a, b) in &cc.polygon_labels {
        assert_eq!((a.kind, b.kind), (TagKind::Real, TagKind::Real));
        assert!(a < b);
    }
}

/// Every sample on a facet is equidistant to its two patches, and no other
/// patch is clearly nearer.
fn assert_equidistant(cc: &CellComplex, s: &PatchedSurface, tol: f64, samples: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (p, poly) in sample_complex(cc, samples, &mut rng) {
        let d = patch_distances(s, p);
        let (a, b) = cc.polygon_labels[poly];
        let (da, db) = (d[a.patch], d[b.patch]);
        let nearest = s.active_patches().map(|k| d[k]).fold(f64::INFINITY, f64::min);
        assert!((da - db).abs() <= tol, "{p:?} {a:?}={da} {b:?}={db}");
        assert!(da.min(db) <= nearest + tol, "{p:?} labelled {da} but nearest {nearest}");
    }
}

#[test]
fn single_patch_has_empty_diagram() {
    let s = tiny_triangles(&[[0.5, 0.5, 0.5]], 0.05);
    let tets = box_tets([0.0; 3], [1.0; 3], [4, 4, 4]);
    assert!(compute_voronoi(&s, &tets, &PipelineConfig::default()).unwrap().is_empty());
}

#[test]
fn four_point_diagram_matches_argmin() {
    let s = tiny_triangles(&FOUR_POINTS, 1e-3);
    let tets = box_tets([0.0; 3], [1.0; 3], [12, 12, 12]);
    let h = tets.max_circumradius();
    let cc = compute_voronoi(&s, &tets, &PipelineConfig::default()).unwrap();
    assert_real_pairs(&cc);
    assert_equidistant(&cc, &s, 4.0 * h, 500);

    // an owner change between neighbouring grid samples, with every other patch clearly farther,
    // must show up as a label pair
    let n = 20;
    let at = |i: usize, j: usize, k: usize| Vec3::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64, (k as f64 + 0.5) / n as f64);
    let ranked = |p: Vec3| {
        let d = patch_distances(&s, p);
        let mut idx: Vec<usize> = (0..d.len()).collect();
        idx.sort_by(|x, y| d[*x].total_cmp(&d[*y]));
        (idx, d)
    };
    let labels = label_pairs(&cc);
    let mut expected = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (r1, d1) = ranked(at(i, j, k));
                for (di, dj, dk) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                    if i + di == n || j + dj == n || k + dk == n {
                        continue;
                    }
                    let (r2, d2) = ranked(at(i + di, j + dj, k + dk));
                    let (a, b) = (r1[0], r2[0]);
                    if a == b {
                        continue;
                    }
                    let clear = |d: &[f64]| (0..d.len()).filter(|&x| x != a && x != b).all(|x| d[x] > d[a].max(d[b]) + 4.0 * h);
                    if clear(&d1) && clear(&d2) {
                        expected.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
    }
    assert!(!expected.is_empty());
    assert!(expected.is_subset(&labels), "expected {expected:?} got {labels:?}");
}

#[test]
fn cube_medial_axis_passes_through_center() {
    let s = unit_cube(1);
    let tets = box_tets([0.0; 3], [1.0; 3], [7, 7, 7]);
    let h = tets.max_circumradius();
    let cc = compute_medial_axis(&s, &tets, &PipelineConfig::default()).unwrap();
    assert_real_pairs(&cc);
    let c = Vec3::new(0.5, 0.5, 0.5);
    let (tris, _) = fan_triangles(&cc);
    let gap = tris.iter().map(|t| closest_point_on_triangle(c, *t).0.distance(c)).fold(f64::INFINITY, f64::min);
    assert!(gap <= 2.0 * h, "{gap}");
    for v in &cc.vertices {
        for x in v.to_array() {
            assert!((-1e-9..=1.0 + 1e-9).contains(&x));
        }
    }
    // six 90 degree patch pairs: the smooth-transition test keeps everything
    let f = OrganicFilter { min_facet_area: Some(0.0), ..Default::default() };
    assert_eq!(filter_organic(&cc, &s, &f), cc);
}

#[test]
fn sheet_metal_sides_excluded() {
    let mut s = box_surface([0.0; 3], [1.0, 1.0, 0.2], 2);
    let tets = box_tets([0.0; 3], [1.0, 1.0, 0.2], [10, 10, 3]);
    let h = tets.max_circumradius();
    let with_sides = compute_medial_axis(&s, &tets, &PipelineConfig::default()).unwrap();
    assert!(label_pairs(&with_sides).len() > 1);
    s.exclude_patches([0, 1, 2, 3]).unwrap();
    let cc = compute_medial_axis(&s, &tets, &PipelineConfig::default()).unwrap();
    assert!(!cc.is_empty());
    assert_eq!(label_pairs(&cc), BTreeSet::from([(4, 5)]));
    for v in &cc.vertices {
        assert!((v.z - 0.1).abs() <= 2.0 * h);
    }
}

/// L-shaped prism: the unit squares at (0,0), (1,0) and (0,1), extruded to z = 1.
fn l_prism() -> (PatchedSurface, TetMesh) {
    let mut v = Vec::new();
    let mut tris = Vec::new();
    let mut labels = Vec::new();
    let mut quad = |pts: [[f64; 3]; 4], patch: usize| {
        let b = v.len();
        v.extend(pts.map(Vec3::from));
        tris.push([b, b + 1, b + 2]);
        tris.push([b, b + 2, b + 3]);
        labels.extend([patch, patch]);
    };
    for (x, y) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
        quad([[x, y, 0.0], [x, y + 1.0, 0.0], [x + 1.0, y + 1.0, 0.0], [x + 1.0, y, 0.0]], 0);
        quad([[x, y, 1.0], [x + 1.0, y, 1.0], [x + 1.0, y + 1.0, 1.0], [x, y + 1.0, 1.0]], 1);
    }
    let outline = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
    for k in 0..6 {
        let (a, b) = (outline[k], outline[(k + 1) % 6]);
        quad([[a[0], a[1], 0.0], [b[0], b[1], 0.0], [b[0], b[1], 1.0], [a[0], a[1], 1.0]], 2 + k);
    }
    let surface = PatchedSurface::new(v, tris, labels).unwrap();
    let grid = box_tets([0.0; 3], [2.0, 2.0, 1.0], [14, 14, 7]);
    let inside: Vec<[usize; 4]> = grid
        .tets
        .iter()
        .copied()
        .filter(|t| {
            let c = t.iter().fold(Vec3::new(0.0, 0.0, 0.0), |a, &i| a + grid.vertices[i]) * 0.25;
            !(c.x > 1.0 && c.y > 1.0)
        })
        .collect();
    (surface, TetMesh::new(grid.vertices.clone(), inside).unwrap())
}

#[test]
fn l_prism_medial_axis_is_equidistant() {
    let (s, tets) = l_prism();
    let h = tets.max_circumradius();
    let cc = compute_medial_axis(&s, &tets, &PipelineConfig::default()).unwrap();
    assert_real_pairs(&cc);
    assert!(cc.len() > 100);
    assert_equidistant(&cc, &s, 4.0 * h, 1000);
}

#[test]
fn voronoi_is_independent_of_thread_count() {
    let s = tiny_triangles(&FOUR_POINTS, 1e-3);
    let tets = box_tets([0.0; 3], [1.0; 3], [6, 6, 6]);
    let run = |threads| compute_voronoi(&s, &tets, &PipelineConfig { threads, ..Default::default() }).unwrap();
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

/// Icosahedron subdivided twice and projected to a sphere of radius 0.5;
/// each original face is one patch.
fn icosphere() -> PatchedSurface {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let base = [
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ];
    let faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6],
        [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10],
        [8, 6, 7], [9, 8, 1],
    ];
    let mut v = Vec::new();
    let mut tris = Vec::new();
    let mut labels = Vec::new();
    let n = 4;
    for (patch, f) in faces.iter().enumerate() {
        let [a, b, c] = f.map(|i| Vec3::from(base[i]));
        let b0 = v.len();
        let id = |i: usize, j: usize| b0 + i * (n + 1) - i * (i.saturating_sub(1)) / 2 + j;
        let mut count = 0;
        for i in 0..=n {
            for j in 0..=n - i {
                let p = a + (b - a) * (i as f64 / n as f64) + (c - a) * (j as f64 / n as f64);
                v.push(p.normalized() * 0.5);
                count += 1;
            }
        }
        assert_eq!(count, (n + 1) * (n + 2) / 2);
        for i in 0..n {
            for j in 0..n - i {
                tris.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                labels.push(patch);
                if j + 1 < n - i {
                    tris.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                    labels.push(patch);
                }
            }
        }
    }
    PatchedSurface::new(v, tris, labels).unwrap()
}

#[test]
fn icosphere_offset_distance() {
    let s = icosphere();
    let tets = box_tets([-0.8; 3], [0.8; 3], [20, 20, 20]);
    let h = tets.max_circumradius();
    let cfg = PipelineConfig::new(Product::Offset);
    let off = compute_offset(&s, &tets, 0.2, &cfg).unwrap();
    assert!(!off.inward.is_empty() && !off.outward.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (layer, radius) in [(&off.inward, 0.3), (&off.outward, 0.7)] {
        for (a, b) in &layer.polygon_labels {
            assert_eq!((a.kind, b.kind), (TagKind::Real, TagKind::Virtual));
        }
        for (p, _) in sample_complex(layer, 300, &mut rng) {
            let d = patch_distances(&s, p).into_iter().fold(f64::INFINITY, f64::min);
            assert!((d - 0.2).abs() <= 4.0 * h, "{p:?} at {d}");
            assert!((p.norm() - radius).abs() <= 4.0 * h + 0.02);
        }
    }
}

#[test]
fn mirror_tags_never_reach_voronoi_output() {
    let s = unit_cube(1);
    let tets = box_tets([0.0; 3], [1.0; 3], [3, 3, 3]);
    let cc = compute_voronoi(&s, &tets, &PipelineConfig::default()).unwrap();
    assert!(cc.polygon_labels.iter().all(|(a, b)| !a.is_virtual() && !b.is_virtual() && a != b));
}

#[test]
fn offset_config_is_validated() {
    let s = unit_cube(1);
    let tets = box_tets([-0.5; 3], [1.5; 3], [2, 2, 2]);
    assert!(compute_offset(&s, &tets, 0.0, &PipelineConfig::default()).is_err());
    assert!(compute_offset(&s, &tets, -0.1, &PipelineConfig::default()).is_err());
}
