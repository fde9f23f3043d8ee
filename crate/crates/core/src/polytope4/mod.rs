//! The convex region below the lower envelope of a tet's linear fields,
//! stored as a 4D polytope in (x, y, z, d).
//!
//! Vertices carry the set of hyperplanes they lie on. Edges are kept
//! explicitly. Cutting with a new field removes the part above it, so after
//! all fields are inserted the top facets of the polytope are exactly the
//! lower envelope.

mod cut;
mod envelope;
mod plane_set;

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{intersect_planes, rational, to_f64, ExactPlane, Rational};
use crate::geom::{tet_volume6, Vec3};
use crate::linear_field::{GeneratorTag, Hyperplane4};

pub use crate::exact::exact_side;
pub use cut::{classify, edge_hyperplane_intersection, SideClassification};
pub use envelope::{EnvelopeCell, EnvelopeFacet, Face2};
pub use plane_set::{PlaneSet, MAX_PLANES};

pub type PlaneId = u32;
pub type VertexId = u32;

pub const BOTTOM: PlaneId = 0;
pub const TOP: PlaneId = 1;
/// Id of the side plane opposite tet vertex `i`.
pub const fn side_plane(i: usize) -> PlaneId {
    2 + i as PlaneId
}
pub const FIRST_FIELD: PlaneId = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Float,
    /// Rational vertex positions and exact orientation signs.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutConfig {
    /// Tolerance below which a float orientation counts as incident.
    pub epsilon: f64,
    pub backend: Backend,
    /// Height of the prism floor.
    pub d_min: f64,
    /// Height of the prism ceiling; must exceed every field value in the tet.
    pub d_max: f64,
}

impl Default for CutConfig {
    fn default() -> Self {
        CutConfig { epsilon: 1e-9, backend: Backend::Float, d_min: 0.0, d_max: 1e3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlaneKind {
    Bottom,
    Top,
    Side(usize),
    Field(Hyperplane4),
}

/// Half-space `g · (x, y, z, d) + w ≤ 0`.
#[derive(Clone, Debug)]
pub struct Plane {
    pub kind: PlaneKind,
    pub g: [f64; 4],
    pub w: f64,
    exact: Option<Box<ExactPlane>>,
}

impl Plane {
    #[inline]
    pub fn eval(&self, p: &[f64; 4]) -> f64 {
        self.g[0] * p[0] + self.g[1] * p[1] + self.g[2] * p[2] + self.g[3] * p[3] + self.w
    }

    pub fn tag(&self) -> Option<GeneratorTag> {
        match &self.kind {
            PlaneKind::Field(h) => Some(h.tag),
            _ => None,
        }
    }

    pub fn exact(&self) -> Option<&ExactPlane> {
        self.exact.as_deref()
    }

    fn float(kind: PlaneKind, g: [f64; 4], w: f64) -> Plane {
        Plane { kind, g, w, exact: None }
    }

    fn from_exact(kind: PlaneKind, e: ExactPlane) -> Plane {
        let (g, w) = e.to_f64();
        Plane { kind, g, w, exact: Some(Box::new(e)) }
    }
}

#[derive(Clone, Debug)]
struct ExactVertex {
    coords: [Rational; 4],
    encoding: [PlaneId; 4],
}

#[derive(Clone, Debug)]
pub struct Vertex4 {
    pub pos: [f64; 4],
    pub planes: PlaneSet,
    pub alive: bool,
    exact: Option<Box<ExactVertex>>,
}

impl Vertex4 {
    pub fn point3(&self) -> Vec3 {
        Vec3::new(self.pos[0], self.pos[1], self.pos[2])
    }

    pub fn d(&self) -> f64 {
        self.pos[3]
    }

    /// The four planes whose intersection defines this vertex in exact mode.
    pub fn encoding(&self) -> Option<[PlaneId; 4]> {
        self.exact.as_ref().map(|e| e.encoding)
    }

    pub fn exact_coords(&self) -> Option<&[Rational; 4]> {
        self.exact.as_ref().map(|e| &e.coords)
    }
}

#[derive(Clone, Debug)]
pub struct Polytope4 {
    tet: [Vec3; 4],
    cfg: CutConfig,
    planes: Vec<Plane>,
    vertices: Vec<Vertex4>,
    edges: Vec<[VertexId; 2]>,
    empty: bool,
}

/// The prism `tet × [d_min, d_max]` with bottom, top and the four side planes.
pub fn init_prism(tet: &[Vec3; 4], cfg: &CutConfig) -> Result<Polytope4> {
    if !(cfg.d_max > cfg.d_min) {
        return Err(Error::Validation(format!("d_max {} must exceed d_min {}", cfg.d_max, cfg.d_min)));
    }
    let vol = tet_volume6(tet[0], tet[1], tet[2], tet[3]);
    if !(vol.abs() > 0.0) || !vol.is_finite() {
        return Err(Error::DegenerateTet);
    }
    let mut planes = Vec::with_capacity(16);
    match cfg.backend {
        Backend::Float => {
            planes.push(Plane::float(PlaneKind::Bottom, [0.0, 0.0, 0.0, -1.0], cfg.d_min));
            planes.push(Plane::float(PlaneKind::Top, [0.0, 0.0, 0.0, 1.0], -cfg.d_max));
            for i in 0..4 {
                let [a, b, c] = others(i).map(|j| tet[j]);
                let mut n = (b - a).cross(c - a);
                let mut off = -n.dot(a);
                if n.dot(tet[i]) + off > 0.0 {
                    n = -n;
                    off = -off;
                }
                planes.push(Plane::float(PlaneKind::Side(i), [n.x, n.y, n.z, 0.0], off));
            }
        }
        Backend::Exact => {
            let zero = Rational::zero;
            let one = Rational::one();
            planes.push(Plane::from_exact(
                PlaneKind::Bottom,
                ExactPlane { g: [zero(), zero(), zero(), -one.clone()], w: rational(cfg.d_min) },
            ));
            planes.push(Plane::from_exact(
                PlaneKind::Top,
                ExactPlane { g: [zero(), zero(), zero(), one], w: -rational(cfg.d_max) },
            ));
            let pts = tet.map(crate::exact::rational_vec);
            for i in 0..4 {
                let [a, b, c] = others(i).map(|j| &pts[j]);
                let u = [0, 1, 2].map(|k| &b[k] - &a[k]);
                let v = [0, 1, 2].map(|k| &c[k] - &a[k]);
                let mut n = [
                    &u[1] * &v[2] - &u[2] * &v[1],
                    &u[2] * &v[0] - &u[0] * &v[2],
                    &u[0] * &v[1] - &u[1] * &v[0],
                ];
                let dot = |n: &[Rational; 3], p: &[Rational; 3]| &n[0] * &p[0] + &n[1] * &p[1] + &n[2] * &p[2];
                let mut off = -dot(&n, a);
                if (dot(&n, &pts[i]) + &off).is_positive() {
                    n = n.map(|x| -x);
                    off = -off;
                }
                let [nx, ny, nz] = n;
                planes.push(Plane::from_exact(PlaneKind::Side(i), ExactPlane { g: [nx, ny, nz, zero()], w: off }));
            }
        }
    }
    let mut vertices = Vec::with_capacity(32);
    for (cap, d) in [(BOTTOM, cfg.d_min), (TOP, cfg.d_max)] {
        for i in 0..4 {
            let set = PlaneSet::from_ids([cap].into_iter().chain(others(i).map(side_plane)));
            let p = tet[i];
            let mut v = Vertex4 { pos: [p.x, p.y, p.z, d], planes: set, alive: true, exact: None };
            if cfg.backend == Backend::Exact {
                let [s0, s1, s2] = others(i).map(side_plane);
                let encoding = [cap, s0, s1, s2];
                let coords = intersect_planes(encoding.map(|id| planes[id as usize].exact.as_deref().unwrap()))?;
                v.exact = Some(Box::new(ExactVertex { coords, encoding }));
            }
            vertices.push(v);
        }
    }
    let mut edges = Vec::with_capacity(64);
    for i in 0..4u32 {
        for j in i + 1..4 {
            edges.push([i, j]);
            edges.push([i + 4, j + 4]);
        }
        edges.push([i, i + 4]);
    }
    Ok(Polytope4 { tet: *tet, cfg: *cfg, planes, vertices, edges, empty: false })
}

fn others(i: usize) -> [usize; 3] {
    match i {
        0 => [1, 2, 3],
        1 => [0, 2, 3],
        2 => [0, 1, 3],
        _ => [0, 1, 2],
    }
}

impl Polytope4 {
    pub fn tet(&self) -> &[Vec3; 4] {
        &self.tet
    }

    pub fn config(&self) -> &CutConfig {
        &self.cfg
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn plane(&self, id: PlaneId) -> &Plane {
        &self.planes[id as usize]
    }

    /// All vertices ever created, alive or not; ids index this slice.
    pub fn vertices(&self) -> &[Vertex4] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex4 {
        &self.vertices[id as usize]
    }

    pub fn is_alive(&self, id: VertexId) -> bool {
        self.vertices.get(id as usize).is_some_and(|v| v.alive)
    }

    pub fn alive_vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex4)> {
        self.vertices.iter().enumerate().filter(|(_, v)| v.alive).map(|(i, v)| (i as VertexId, v))
    }

    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    /// Field hyperplanes inserted so far, in insertion order.
    pub fn fields(&self) -> impl Iterator<Item = (PlaneId, &Hyperplane4)> {
        self.planes.iter().enumerate().filter_map(|(i, p)| match &p.kind {
            PlaneKind::Field(h) => Some((i as PlaneId, h)),
            _ => None,
        })
    }

    pub fn has_field(&self, tag: GeneratorTag) -> bool {
        self.fields().any(|(_, h)| h.tag == tag)
    }

    /// Largest value of any plane expression over the alive vertices; a
    /// convexity check that should never exceed the cut tolerance.
    pub fn max_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (_, v) in self.alive_vertices() {
            for p in &self.planes {
                worst = worst.max(p.eval(&v.pos));
            }
        }
        worst
    }

    /// Structural checks that must hold after every cut.
    pub fn check_consistency(&self) -> Result<()> {
        if self.empty {
            return Ok(());
        }
        let mut degree = vec![0usize; self.vertices.len()];
        for &[a, b] in &self.edges {
            let (va, vb) = (self.vertex(a), self.vertex(b));
            if !va.alive || !vb.alive {
                return Err(Error::Inconsistent(format!("edge {a}-{b} touches a removed vertex")));
            }
            if va.planes.intersection(vb.planes).len() < 3 {
                return Err(Error::Inconsistent(format!("edge {a}-{b} shares fewer than 3 planes")));
            }
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        for (id, v) in self.alive_vertices() {
            if v.planes.len() < 4 {
                return Err(Error::Inconsistent(format!("vertex {id} lies on {} planes", v.planes.len())));
            }
            if degree[id as usize] < 4 {
                return Err(Error::Inconsistent(format!("vertex {id} has degree {}", degree[id as usize])));
            }
        }
        Ok(())
    }

    /// Text listing of planes, alive vertices and edges.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let alive = self.alive_vertices().count();
        writeln!(s, "polytope4 planes={} vertices={} edges={} empty={}", self.planes.len(), alive, self.edges.len(), self.empty)
            .unwrap();
        for (i, p) in self.planes.iter().enumerate() {
            match &p.kind {
                PlaneKind::Bottom => writeln!(s, "plane {i} bottom d={}", self.cfg.d_min),
                PlaneKind::Top => writeln!(s, "plane {i} top d={}", self.cfg.d_max),
                PlaneKind::Side(k) => writeln!(s, "plane {i} side {k}"),
                PlaneKind::Field(h) => writeln!(s, "plane {i} field {} {} {} {} {}", h.tag, h.a, h.b, h.c, h.w),
            }
            .unwrap();
        }
        for (id, v) in self.alive_vertices() {
            write!(s, "vertex {id} {} {} {} {} |", v.pos[0], v.pos[1], v.pos[2], v.pos[3]).unwrap();
            for p in v.planes.iter() {
                write!(s, " {p}").unwrap();
            }
            s.push('\n');
        }
        for [a, b] in &self.edges {
            writeln!(s, "edge {a} {b}").unwrap();
        }
        s
    }

    fn exact_plane(&self, id: PlaneId) -> &ExactPlane {
        self.planes[id as usize].exact.as_deref().expect("exact backend stores rational planes")
    }

    fn exact_position(coords: &[Rational; 4]) -> [f64; 4] {
        [to_f64(&coords[0]), to_f64(&coords[1]), to_f64(&coords[2]), to_f64(&coords[3])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_tet() -> [Vec3; 4] {
        [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)]
    }

    #[test]
    fn prism_shape() {
        for backend in [Backend::Float, Backend::Exact] {
            let cfg = CutConfig { backend, d_max: 2.0, ..Default::default() };
            let p = init_prism(&unit_tet(), &cfg).unwrap();
            assert_eq!(p.alive_vertices().count(), 8);
            assert_eq!(p.edges().len(), 16);
            assert_eq!(p.planes().len(), 6);
            p.check_consistency().unwrap();
            assert!(p.max_violation().abs() < 1e-15);
            for (_, v) in p.alive_vertices() {
                assert_eq!(v.planes.len(), 4);
            }
        }
    }

    #[test]
    fn side_planes_face_outward() {
        let p = init_prism(&unit_tet(), &CutConfig::default()).unwrap();
        let inside = [0.1, 0.1, 0.1, 0.5];
        for plane in p.planes() {
            assert!(plane.eval(&inside) < 0.0);
        }
    }

    #[test]
    fn rejects_flat_tet() {
        let mut t = unit_tet();
        t[3] = Vec3::new(0.5, 0.5, 0.0);
        assert!(matches!(init_prism(&t, &CutConfig::default()), Err(Error::DegenerateTet)));
    }
}
