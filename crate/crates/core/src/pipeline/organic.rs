use std::collections::{BTreeMap, HashMap};

use crate::geom::polygon_area;
use crate::mesh_io::{weld_points, CellComplex, PatchedSurface, WELD_TOLERANCE};

/// Removal of medial-axis branches caused by smooth patch transitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrganicFilter {
    /// Patch pairs whose mean dihedral angle is at least this many degrees
    /// (180 is flat) lose their shared facets. Zero or less keeps them all.
    pub dihedral_threshold: f64,
    /// Components with less total area are dropped; defaults to
    /// `1e-4 · diagonal²` of the surface bounding box.
    pub min_facet_area: Option<f64>,
}

impl Default for OrganicFilter {
    fn default() -> Self {
        OrganicFilter { dihedral_threshold: 170.0, min_facet_area: None }
    }
}

/// Mean dihedral angle in degrees along the boundary of each adjacent
/// patch pair, keyed with the smaller patch first.
pub fn patch_dihedral_angles(surface: &PatchedSurface) -> BTreeMap<(usize, usize), f64> {
    let tol = WELD_TOLERANCE * surface.bbox().diagonal();
    let (remap, _) = weld_points(&surface.vertices, tol);
    let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in surface.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (remap[tri[k]], remap[tri[(k + 1) % 3]]);
            edges.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut sums: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut keys: Vec<_> = edges.into_iter().collect();
    keys.sort();
    for (_, tris) in keys {
        let [s, t] = tris[..] else { continue };
        let (ps, pt) = (surface.patch_of_triangle[s], surface.patch_of_triangle[t]);
        if ps == pt {
            continue;
        }
        let (ns, nt) = (surface.triangle_normal(s).normalized(), surface.triangle_normal(t).normalized());
        let between = ns.dot(nt).clamp(-1.0, 1.0).acos().to_degrees();
        let e = sums.entry((ps.min(pt), ps.max(pt))).or_insert((0.0, 0));
        e.0 += 180.0 - between;
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

pub fn filter_organic(cc: &CellComplex, surface: &PatchedSurface, f: &OrganicFilter) -> CellComplex {
    let diag = surface.bbox().diagonal();
    let smooth: Vec<(usize, usize)> = if f.dihedral_threshold > 0.0 {
        patch_dihedral_angles(surface)
            .into_iter()
            .filter(|(_, angle)| *angle >= f.dihedral_threshold)
            .map(|(k, _)| k)
            .collect()
    } else {
        Vec::new()
    };
    let kept = cc.retain(|i| {
        let (a, b) = cc.polygon_labels[i];
        a.is_virtual() || b.is_virtual() || !smooth.contains(&(a.patch.min(b.patch), a.patch.max(b.patch)))
    });
    let min_area = f.min_facet_area.unwrap_or(1e-4 * diag * diag);
    let mut keep = vec![true; kept.len()];
    for comp in kept.components(WELD_TOLERANCE * diag) {
        let area: f64 = comp.iter().map(|&i| polygon_area(&kept.polygon_points(i))).sum();
        if area < min_area {
            for i in comp {
                keep[i] = false;
            }
        }
    }
    kept.retain(|i| keep[i])
}
