//! Bounding volume hierarchy over surface triangles with exact
//! point-to-triangle nearest queries.

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::mesh_io::PatchedSurface;

const LEAF_SIZE: usize = 4;
/// Distances closer than this count as ties, broken by lowest triangle index.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BvhScope {
    /// All triangles of non-excluded patches.
    Whole,
    Patch(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearestHit {
    pub point: Vec3,
    pub distance: f64,
    pub patch: usize,
    pub triangle: usize,
}

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf { start: usize, count: usize },
    Inner { left: usize, right: usize },
}

#[derive(Clone, Debug)]
struct Node {
    bbox: Aabb,
    kind: NodeKind,
}

#[derive(Clone, Debug)]
struct Item {
    tri: [Vec3; 3],
    triangle: usize,
    patch: usize,
}

#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    items: Vec<Item>,
    scope: BvhScope,
}

pub fn build_bvh(surface: &PatchedSurface, scope: BvhScope) -> Result<Bvh> {
    let triangles: Vec<usize> = match scope {
        BvhScope::Whole => (0..surface.triangles.len())
            .filter(|&t| !surface.excluded_patches.contains(&surface.patch_of_triangle[t]))
            .collect(),
        BvhScope::Patch(p) => {
            if p >= surface.patch_count() {
                return Err(Error::PatchOutOfRange { patch: p, count: surface.patch_count() });
            }
            surface.patches[p].clone()
        }
    };
    let items = triangles
        .into_iter()
        .map(|t| Item { tri: surface.triangle(t), triangle: t, patch: surface.patch_of_triangle[t] })
        .collect();
    Bvh::from_items(items, scope)
}

impl Bvh {
    /// Index over an arbitrary triangle soup; `patches[i]` labels triangle `i`.
    pub fn from_triangles(tris: Vec<[Vec3; 3]>, patches: Vec<usize>) -> Result<Bvh> {
        let items = tris
            .into_iter()
            .zip(patches)
            .enumerate()
            .map(|(i, (tri, patch))| Item { tri, triangle: i, patch })
            .collect();
        Bvh::from_items(items, BvhScope::Whole)
    }

    fn from_items(mut items: Vec<Item>, scope: BvhScope) -> Result<Bvh> {
        if items.is_empty() {
            return Err(Error::EmptyScope);
        }
        let mut nodes = Vec::with_capacity(2 * items.len() / LEAF_SIZE + 1);
        let n = items.len();
        build_node(&mut nodes, &mut items, 0, n);
        Ok(Bvh { nodes, items, scope })
    }

    pub fn scope(&self) -> BvhScope {
        self.scope
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Triangle indices in leaf order.
    pub fn leaf_triangles(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.triangle).collect()
    }

    pub fn nearest(&self, q: Vec3) -> NearestHit {
        let mut best = NearestHit { point: q, distance: f64::INFINITY, patch: usize::MAX, triangle: usize::MAX };
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bbox.distance_squared(q).sqrt() > best.distance + TIE_TOLERANCE {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for it in &self.items[start..start + count] {
                        let (p, _) = closest_point_on_triangle(q, it.tri);
                        let d = q.distance(p);
                        if better(d, it.triangle, &best) {
                            best = NearestHit { point: p, distance: d, patch: it.patch, triangle: it.triangle };
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left].bbox.distance_squared(q);
                    let dr = self.nodes[right].bbox.distance_squared(q);
                    // push the far child first so the near one is searched first
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }

    /// Checks the structural invariants; used by tests.
    pub fn check_invariants(&self) -> bool {
        let mut seen = vec![false; self.items.len()];
        for node in &self.nodes {
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for (k, it) in self.items[start..start + count].iter().enumerate() {
                        if seen[start + k] || !node.bbox.contains_box(&Aabb::from_points(&it.tri)) {
                            return false;
                        }
                        seen[start + k] = true;
                    }
                }
                NodeKind::Inner { left, right } => {
                    if !node.bbox.contains_box(&self.nodes[left].bbox) || !node.bbox.contains_box(&self.nodes[right].bbox) {
                        return false;
                    }
                }
            }
        }
        seen.iter().all(|s| *s)
    }
}

fn better(d: f64, triangle: usize, best: &NearestHit) -> bool {
    d < best.distance - TIE_TOLERANCE || (d <= best.distance + TIE_TOLERANCE && triangle < best.triangle)
}

fn build_node(nodes: &mut Vec<Node>, items: &mut [Item], start: usize, end: usize) -> usize {
    let slice = &mut items[start..end];
    let bbox = slice.iter().fold(Aabb::EMPTY, |b, it| b.union(Aabb::from_points(&it.tri)));
    let id = nodes.len();
    nodes.push(Node { bbox, kind: NodeKind::Leaf { start, count: end - start } });
    if end - start <= LEAF_SIZE {
        return id;
    }
    let centroid = |it: &Item| (it.tri[0] + it.tri[1] + it.tri[2]) / 3.0;
    let cbox = slice.iter().fold(Aabb::EMPTY, |b, it| b.grow(centroid(it)));
    let axis = cbox.longest_axis();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |a, b| {
        centroid(a)[axis].total_cmp(&centroid(b)[axis]).then(a.triangle.cmp(&b.triangle))
    });
    let left = build_node(nodes, items, start, start + mid);
    let right = build_node(nodes, items, start + mid, end);
    nodes[id].kind = NodeKind::Inner { left, right };
    id
}

/// Closest point on triangle `abc` to `p`, with its barycentric coordinates.
///
/// Classifies `p` against the vertex, edge and face Voronoi regions of the
/// triangle.
pub fn closest_point_on_triangle(p: Vec3, [a, b, c]: [Vec3; 3]) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PatchedSurface {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        PatchedSurface::new(v, vec![[0, 1, 2], [0, 2, 3]], vec![0, 1]).unwrap()
    }

    #[test]
    fn whole_scope_indexes_every_triangle() {
        let bvh = build_bvh(&square(), BvhScope::Whole).unwrap();
        assert_eq!(bvh.len(), 2);
        assert!(bvh.check_invariants());
    }

    #[test]
    fn patch_scope() {
        let bvh = build_bvh(&square(), BvhScope::Patch(1)).unwrap();
        assert_eq!(bvh.leaf_triangles(), vec![1]);
        assert!(matches!(build_bvh(&square(), BvhScope::Patch(2)), Err(Error::PatchOutOfRange { .. })));
    }

    #[test]
    fn excluded_patches_drop_out_of_whole_scope() {
        let mut s = square();
        s.exclude_patches([0]).unwrap();
        assert_eq!(build_bvh(&s, BvhScope::Whole).unwrap().leaf_triangles(), vec![1]);
    }

    #[test]
    fn point_above_square() {
        let bvh = build_bvh(&square(), BvhScope::Whole).unwrap();
        let hit = bvh.nearest(Vec3::new(0.5, 0.5, 1.0));
        assert!((hit.distance - 1.0).abs() < 1e-15);
        assert!(hit.point.distance(Vec3::new(0.5, 0.5, 0.0)) < 1e-15);
        // on the shared diagonal: tie goes to triangle 0
        assert_eq!(hit.triangle, 0);
    }

    #[test]
    fn point_on_surface() {
        let bvh = build_bvh(&square(), BvhScope::Whole).unwrap();
        let q = Vec3::new(0.75, 0.2, 0.0);
        let hit = bvh.nearest(q);
        assert_eq!(hit.distance, 0.0);
        assert_eq!(hit.point, q);
    }

    #[test]
    fn closest_point_regions() {
        let tri = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let (p, _) = closest_point_on_triangle(Vec3::new(-1.0, -1.0, 0.3), tri);
        assert_eq!(p, tri[0]);
        let (p, bc) = closest_point_on_triangle(Vec3::new(0.5, -2.0, 0.0), tri);
        assert_eq!(p, Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(bc, [0.5, 0.5, 0.0]);
        let (p, _) = closest_point_on_triangle(Vec3::new(1.0, 1.0, 0.0), tri);
        assert!(p.distance(Vec3::new(0.5, 0.5, 0.0)) < 1e-15);
    }
}
