use std::collections::{BTreeMap, HashSet};

use crate::geom::{centroid, polygon_area, polygon_normal, Vec3};
use crate::linear_field::GeneratorTag;

use super::{PlaneId, PlaneKind, PlaneSet, Polytope4, VertexId};

/// A 2-face: the vertices on both planes, in cyclic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face2 {
    pub planes: [PlaneId; 2],
    /// Every plane containing the whole face.
    pub support: PlaneSet,
    pub vertices: Vec<VertexId>,
}

/// A 3-face lying on one plane, with its 2-faces.
#[derive(Clone, Debug)]
pub struct Cell3 {
    pub plane: PlaneId,
    pub faces: Vec<Face2>,
}

/// Lower-envelope facet between two fields, projected to 3D.
#[derive(Clone, Debug)]
pub struct EnvelopeFacet {
    pub polygon: Vec<Vec3>,
    pub planes: [PlaneId; 2],
    pub tags: [GeneratorTag; 2],
}

/// Projection of a field's 3-face: the region of the tet that field owns.
#[derive(Clone, Debug)]
pub struct EnvelopeCell {
    pub plane: PlaneId,
    pub tag: GeneratorTag,
    pub facets: Vec<Vec<Vec3>>,
    halfspaces: Vec<(Vec3, f64)>,
}

impl EnvelopeCell {
    fn new(plane: PlaneId, tag: GeneratorTag, facets: Vec<Vec<Vec3>>) -> Self {
        let all: Vec<Vec3> = facets.iter().flatten().copied().collect();
        let inner = centroid(&all);
        let halfspaces = facets
            .iter()
            .filter_map(|f| {
                let n = polygon_normal(f);
                if n.norm() == 0.0 {
                    return None;
                }
                let mut n = n.normalized();
                let c = centroid(f);
                if n.dot(inner - c) > 0.0 {
                    n = -n;
                }
                Some((n, -n.dot(c)))
            })
            .collect();
        EnvelopeCell { plane, tag, facets, halfspaces }
    }

    /// Whether `p` lies in the cell, allowing `tol` outside each facet.
    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        self.halfspaces.iter().all(|(n, w)| n.dot(p) + w <= tol)
    }

    pub fn volume(&self) -> f64 {
        let all: Vec<Vec3> = self.facets.iter().flatten().copied().collect();
        let o = centroid(&all);
        self.facets
            .iter()
            .map(|f| {
                let n = polygon_normal(f);
                if n.norm() == 0.0 {
                    return 0.0;
                }
                polygon_area(f) * n.normalized().dot(centroid(f) - o).abs() / 3.0
            })
            .sum()
    }
}

impl Polytope4 {
    pub fn faces2(&self) -> Vec<Face2> {
        if self.empty {
            return Vec::new();
        }
        let n = self.vertices.len();
        let mut nbrs: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &[a, b] in &self.edges {
            nbrs[a as usize].push(b);
            nbrs[b as usize].push(a);
        }
        let mut by_pair: BTreeMap<(PlaneId, PlaneId), Vec<VertexId>> = BTreeMap::new();
        for (id, v) in self.alive_vertices() {
            let ps: Vec<PlaneId> = v.planes.iter().collect();
            for i in 0..ps.len() {
                for j in i + 1..ps.len() {
                    by_pair.entry((ps[i], ps[j])).or_default().push(id);
                }
            }
        }
        let mut mark = vec![false; n];
        let mut seen: HashSet<Vec<VertexId>> = HashSet::new();
        let mut out = Vec::new();
        for ((p, q), verts) in by_pair {
            if verts.len() < 3 {
                continue;
            }
            for &v in &verts {
                mark[v as usize] = true;
            }
            let inner = |v: VertexId| nbrs[v as usize].iter().copied().filter(|&u| mark[u as usize]);
            let ring = if verts.iter().all(|&v| inner(v).count() == 2) {
                let start = verts[0];
                let mut ring = vec![start];
                let mut prev = start;
                let mut cur = inner(start).min().unwrap();
                while cur != start && ring.len() <= verts.len() {
                    ring.push(cur);
                    let next = inner(cur).find(|&u| u != prev).unwrap_or(prev);
                    prev = cur;
                    cur = next;
                }
                (ring.len() == verts.len() && cur == start).then_some(ring)
            } else {
                None
            };
            for &v in &verts {
                mark[v as usize] = false;
            }
            if let Some(ring) = ring {
                let support = ring.iter().fold(self.vertex(ring[0]).planes, |s, &v| s.intersection(self.vertex(v).planes));
                if seen.insert(verts) {
                    out.push(Face2 { planes: [p, q], support, vertices: ring });
                }
            }
        }
        out
    }

    pub fn cells3(&self) -> Vec<Cell3> {
        let faces = self.faces2();
        let mut by_plane: BTreeMap<PlaneId, Vec<Face2>> = BTreeMap::new();
        for f in faces {
            for p in f.planes {
                by_plane.entry(p).or_default().push(f.clone());
            }
        }
        by_plane
            .into_iter()
            .filter(|(_, fs)| fs.len() >= 4)
            .map(|(plane, faces)| Cell3 { plane, faces })
            .collect()
    }

    pub fn has_cell(&self, tag: GeneratorTag) -> bool {
        self.cells3().iter().any(|c| self.plane(c.plane).tag() == Some(tag))
    }

    fn project(&self, ring: &[VertexId]) -> Vec<Vec3> {
        ring.iter().map(|&v| self.vertex(v).point3()).collect()
    }

    /// Facets shared by two distinct fields, projected to the tet.
    ///
    /// A facet lying on a face of the tet is reported by only one of the two
    /// tets sharing that face, chosen by the orientation of the face normal.
    pub fn lower_envelope(&self) -> Vec<EnvelopeFacet> {
        self.faces2()
            .into_iter()
            .filter_map(|f| {
                let mut fields = f.support.iter().filter_map(|p| self.plane(p).tag().map(|t| (p, t)));
                let (pa, ta) = fields.next()?;
                let (pb, tb) = fields.find(|(_, t)| *t != ta)?;
                for p in f.support.iter() {
                    match self.plane(p).kind {
                        PlaneKind::Bottom | PlaneKind::Top => return None,
                        PlaneKind::Side(_) if !self.owns_shared_face(p) => return None,
                        _ => {}
                    }
                }
                Some(EnvelopeFacet { polygon: self.project(&f.vertices), planes: [pa, pb], tags: [ta, tb] })
            })
            .collect()
    }

    /// Whether this tet reports facets lying on side plane `p`: true when
    /// the first dominant component of the outward normal is negative.
    fn owns_shared_face(&self, p: PlaneId) -> bool {
        let g = &self.plane(p).g;
        let big = g[..3].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let k = (0..3).find(|&k| g[k].abs() > 0.5 * big).unwrap_or(0);
        g[k] < 0.0
    }

    pub fn envelope_cells(&self) -> Vec<EnvelopeCell> {
        self.cells3()
            .into_iter()
            .filter_map(|c| {
                let tag = self.plane(c.plane).tag()?;
                let facets = c.faces.iter().map(|f| self.project(&f.vertices)).collect();
                Some(EnvelopeCell::new(c.plane, tag, facets))
            })
            .collect()
    }
}
