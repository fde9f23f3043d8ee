use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exact::{filtered_side, fit_exact, intersect_planes, rational, to_f64, ExactPlane, Sign};
use crate::linear_field::{fit_hyperplane, GeneratorTag, Hyperplane4};

use super::{Backend, CutConfig, ExactVertex, Plane, PlaneId, PlaneKind, PlaneSet, Polytope4, Vertex4, VertexId, MAX_PLANES};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideClassification {
    /// Strictly above the field: removed by the cut.
    Above,
    Below,
    /// Incident to the field within tolerance.
    On,
}

use SideClassification::{Above, Below, On};

/// Side of the 4D point `v` relative to the graph of `h`.
///
/// The exact backend has no incident class: a zero sign reports `Above`.
pub fn classify(v: &[f64; 4], h: &Hyperplane4, cfg: &CutConfig) -> SideClassification {
    match cfg.backend {
        Backend::Float => {
            let pi = v[3] - (h.a * v[0] + h.b * v[1] + h.c * v[2] + h.w);
            if pi >= cfg.epsilon {
                Above
            } else if pi <= -cfg.epsilon {
                Below
            } else {
                On
            }
        }
        Backend::Exact => {
            let e = field_plane(h.coefficients().map(rational));
            match Sign::of(&e.eval(&v.map(rational))) {
                Sign::Negative => Below,
                _ => Above,
            }
        }
    }
}

/// Point where the segment `v1 v2` crosses the graph of `h`.
pub fn edge_hyperplane_intersection(v1: &[f64; 4], v2: &[f64; 4], h: &Hyperplane4) -> Result<[f64; 4]> {
    let pi = |v: &[f64; 4]| v[3] - (h.a * v[0] + h.b * v[1] + h.c * v[2] + h.w);
    let (p1, p2) = (pi(v1), pi(v2));
    if p1 * p2 > 0.0 || p1 == p2 {
        return Err(Error::SameSide);
    }
    Ok(interpolate(v1, p1, v2, p2))
}

#[inline]
fn interpolate(v1: &[f64; 4], p1: f64, v2: &[f64; 4], p2: f64) -> [f64; 4] {
    let s = p1 - p2;
    [0, 1, 2, 3].map(|k| p1 / s * v2[k] - p2 / s * v1[k])
}

/// `d − (a x + b y + c z + w) ≤ 0` as a plane in polytope form.
fn field_plane([a, b, c, w]: [crate::exact::Rational; 4]) -> ExactPlane {
    ExactPlane { g: [-a, -b, -c, num_traits::One::one()], w: -w }
}

impl Polytope4 {
    /// Removes the part of the polytope above `h`. Returns the vertices
    /// created on the new facet.
    pub fn cut(&mut self, h: &Hyperplane4) -> Result<Vec<VertexId>> {
        let plane = match self.cfg.backend {
            Backend::Float => Plane::float(PlaneKind::Field(*h), [-h.a, -h.b, -h.c, 1.0], -h.w),
            Backend::Exact => Plane::from_exact(PlaneKind::Field(*h), field_plane(h.coefficients().map(rational))),
        };
        self.insert(plane)
    }

    /// Fits the field through the values at the tet vertices and cuts with
    /// it. In exact mode the fit itself is rational.
    pub fn cut_fitted(&mut self, values: [f64; 4], tag: GeneratorTag) -> Result<(Hyperplane4, Vec<VertexId>)> {
        match self.cfg.backend {
            Backend::Float => {
                let h = fit_hyperplane(&self.tet, values, tag)?;
                let created = self.cut(&h)?;
                Ok((h, created))
            }
            Backend::Exact => {
                let coeffs = fit_exact(&self.tet, values)?;
                let [a, b, c, w] = [0, 1, 2, 3].map(|i| to_f64(&coeffs[i]));
                let h = Hyperplane4::new(a, b, c, w, tag);
                let created = self.insert(Plane::from_exact(PlaneKind::Field(h), field_plane(coeffs)))?;
                Ok((h, created))
            }
        }
    }

    fn side_of(&self, v: &Vertex4, plane: &Plane) -> (SideClassification, f64) {
        match (self.cfg.backend, &v.exact, &plane.exact) {
            (Backend::Exact, Some(ev), Some(ep)) => {
                let s = filtered_side(ep, &(plane.g, plane.w), &ev.coords, &v.pos);
                let side = match s {
                    Sign::Positive => Above,
                    Sign::Negative => Below,
                    Sign::Zero => On,
                };
                (side, plane.eval(&v.pos))
            }
            _ => {
                let pi = plane.eval(&v.pos);
                let eps = self.cfg.epsilon;
                let side = if pi >= eps {
                    Above
                } else if pi <= -eps {
                    Below
                } else {
                    On
                };
                (side, pi)
            }
        }
    }

    fn insert(&mut self, plane: Plane) -> Result<Vec<VertexId>> {
        if self.planes.len() >= MAX_PLANES {
            return Err(Error::TooManyPlanes(MAX_PLANES));
        }
        let id = self.planes.len() as PlaneId;
        self.planes.push(plane);
        if self.empty {
            return Ok(Vec::new());
        }
        let n = self.vertices.len();
        let mut side = vec![None; n];
        let mut value = vec![0.0; n];
        let (mut any_above, mut any_below) = (false, false);
        for i in 0..n {
            let v = &self.vertices[i];
            if !v.alive {
                continue;
            }
            let (s, pi) = self.side_of(v, &self.planes[id as usize]);
            any_above |= s == Above;
            any_below |= s == Below;
            side[i] = Some(s);
            value[i] = pi;
        }
        if !any_above {
            return Ok(Vec::new());
        }
        if !any_below {
            for v in &mut self.vertices {
                v.alive = false;
            }
            self.edges.clear();
            self.empty = true;
            return Ok(Vec::new());
        }

        let old = std::mem::take(&mut self.edges);
        let mut edges = Vec::with_capacity(old.len() + 8);
        let mut created = Vec::new();
        for [a, b] in old {
            let (sa, sb) = (side[a as usize].unwrap(), side[b as usize].unwrap());
            match (sa, sb) {
                (Below, Above) | (Above, Below) => {
                    let (lo, hi) = if sa == Below { (a, b) } else { (b, a) };
                    let w = self.split(lo, hi, id, value[lo as usize], value[hi as usize])?;
                    edges.push([lo, w]);
                    created.push(w);
                }
                (Above, _) | (_, Above) => {}
                _ => edges.push([a, b]),
            }
        }
        let mut face: Vec<VertexId> = Vec::new();
        for (i, s) in side.iter().enumerate() {
            match s {
                Some(On) => {
                    self.vertices[i].planes.insert(id);
                    face.push(i as VertexId);
                }
                Some(Above) => self.vertices[i].alive = false,
                _ => {}
            }
        }
        face.extend_from_slice(&created);

        let mut in_face = vec![false; self.vertices.len()];
        for &f in &face {
            in_face[f as usize] = true;
        }
        let existing: HashSet<(VertexId, VertexId)> = edges
            .iter()
            .filter(|[a, b]| in_face[*a as usize] && in_face[*b as usize])
            .map(|&[a, b]| (a.min(b), a.max(b)))
            .collect();
        let sets: Vec<PlaneSet> = face.iter().map(|&f| self.vertices[f as usize].planes).collect();
        for i in 0..face.len() {
            for j in i + 1..face.len() {
                let common = sets[i].intersection(sets[j]);
                if common.len() < 3 {
                    continue;
                }
                let (a, b) = (face[i], face[j]);
                if existing.contains(&(a.min(b), a.max(b))) {
                    continue;
                }
                let blocked = (0..face.len()).any(|k| k != i && k != j && sets[k].is_superset(common));
                if !blocked {
                    edges.push([a, b]);
                }
            }
        }
        self.edges = edges;

        let mut face_degree = vec![0usize; self.vertices.len()];
        for &[a, b] in &self.edges {
            if in_face[a as usize] && in_face[b as usize] {
                face_degree[a as usize] += 1;
                face_degree[b as usize] += 1;
            }
        }
        if let Some(&bad) = face.iter().find(|&&f| face_degree[f as usize] < 3) {
            return Err(Error::Inconsistent(format!(
                "vertex {bad} has {} neighbours on the facet of plane {id}",
                face_degree[bad as usize]
            )));
        }
        self.check_consistency()?;
        Ok(created)
    }

    /// New vertex on edge `lo hi`, where `lo` is below plane `id` and `hi` above.
    fn split(&mut self, lo: VertexId, hi: VertexId, id: PlaneId, p_lo: f64, p_hi: f64) -> Result<VertexId> {
        let (vl, vh) = (&self.vertices[lo as usize], &self.vertices[hi as usize]);
        let common = vl.planes.intersection(vh.planes);
        if common.len() < 3 {
            return Err(Error::Inconsistent(format!("edge {lo}-{hi} shares {} planes", common.len())));
        }
        let mut planes = common;
        planes.insert(id);
        let vertex = match self.cfg.backend {
            Backend::Float => {
                Vertex4 { pos: interpolate(&vh.pos, p_hi, &vl.pos, p_lo), planes, alive: true, exact: None }
            }
            Backend::Exact => {
                let ids: Vec<PlaneId> = common.iter().collect();
                let mut found = None;
                'search: for x in 0..ids.len() {
                    for y in x + 1..ids.len() {
                        for z in y + 1..ids.len() {
                            let encoding = [ids[x], ids[y], ids[z], id];
                            if let Ok(coords) = intersect_planes(encoding.map(|p| self.exact_plane(p))) {
                                found = Some(ExactVertex { coords, encoding });
                                break 'search;
                            }
                        }
                    }
                }
                let ev = found.ok_or(Error::SingularEncoding)?;
                Vertex4 { pos: Self::exact_position(&ev.coords), planes, alive: true, exact: Some(Box::new(ev)) }
            }
        };
        self.vertices.push(vertex);
        Ok((self.vertices.len() - 1) as VertexId)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{init_prism, tests::unit_tet, TOP};
    use super::*;
    use crate::geom::Vec3;

    fn cfg(backend: Backend) -> CutConfig {
        CutConfig { backend, d_max: 2.0, ..Default::default() }
    }

    fn tag(p: usize) -> GeneratorTag {
        GeneratorTag::real(p)
    }

    #[test]
    fn classify_float() {
        let h = Hyperplane4::new(0.0, 0.0, 0.0, 1.0, tag(0));
        let c = cfg(Backend::Float);
        assert_eq!(classify(&[0.3, 0.2, 0.1, 2.0], &h, &c), Above);
        assert_eq!(classify(&[0.3, 0.2, 0.1, 0.0], &h, &c), Below);
        assert_eq!(classify(&[0.3, 0.2, 0.1, 1.0 + 1e-12], &h, &c), On);
    }

    #[test]
    fn classify_exact_zero_reports_above() {
        let h = Hyperplane4::new(0.5, 0.25, 0.0, 1.0, tag(0));
        let c = cfg(Backend::Exact);
        assert_eq!(classify(&[0.5, 1.0, 7.0, 1.5], &h, &c), Above);
        assert_eq!(classify(&[0.5, 1.0, 7.0, 1.5 - 1e-15], &h, &c), Below);
    }

    #[test]
    fn intersection_on_segment() {
        let h = Hyperplane4::new(0.0, 0.0, 0.0, 1.0, tag(0));
        let p = edge_hyperplane_intersection(&[0.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 2.0], &h).unwrap();
        assert_eq!(p, [0.5, 0.0, 0.0, 1.0]);
        assert!(matches!(
            edge_hyperplane_intersection(&[0.0; 4], &[1.0, 0.0, 0.0, 0.5], &h),
            Err(Error::SameSide)
        ));
    }

    #[test]
    fn horizontal_cut_replaces_top() {
        for backend in [Backend::Float, Backend::Exact] {
            let mut p = init_prism(&unit_tet(), &cfg(backend)).unwrap();
            let created = p.cut(&Hyperplane4::new(0.0, 0.0, 0.0, 1.0, tag(0))).unwrap();
            assert_eq!(created.len(), 4);
            assert_eq!(p.alive_vertices().count(), 8);
            assert_eq!(p.edges().len(), 16);
            for &v in &created {
                assert_eq!(p.vertex(v).d(), 1.0);
                assert!(!p.vertex(v).planes.contains(TOP));
            }
            p.check_consistency().unwrap();
        }
    }

    #[test]
    fn cut_above_everything_is_noop() {
        let mut p = init_prism(&unit_tet(), &cfg(Backend::Float)).unwrap();
        let before = p.dump();
        let created = p.cut(&Hyperplane4::new(0.0, 0.0, 0.0, 5.0, tag(0))).unwrap();
        assert!(created.is_empty());
        assert_eq!(p.alive_vertices().count(), 8);
        assert_eq!(p.planes().len(), 7);
        assert_eq!(before.lines().filter(|l| l.starts_with("vertex")).count(), 8);
    }

    #[test]
    fn cut_below_everything_empties() {
        let mut p = init_prism(&unit_tet(), &CutConfig::default()).unwrap();
        p.cut(&Hyperplane4::new(0.0, 0.0, 0.0, -1.0, tag(0))).unwrap();
        assert!(p.is_empty());
        assert_eq!(p.alive_vertices().count(), 0);
    }

    #[test]
    fn repeated_cut_is_idempotent() {
        for backend in [Backend::Float, Backend::Exact] {
            let mut p = init_prism(&unit_tet(), &cfg(backend)).unwrap();
            let h = Hyperplane4::new(0.5, -0.25, 0.75, 0.3, tag(0));
            p.cut(&h).unwrap();
            let verts: Vec<_> = p.alive_vertices().map(|(i, v)| (i, v.pos)).collect();
            let edges = p.edges().to_vec();
            assert!(p.cut(&h).unwrap().is_empty());
            assert_eq!(p.alive_vertices().map(|(i, v)| (i, v.pos)).collect::<Vec<_>>(), verts);
            assert_eq!(p.edges(), &edges[..]);
        }
    }

    #[test]
    fn cut_through_vertex_tags_it() {
        // plane through the bottom corner at vertex 0 and rising steeply
        let mut p = init_prism(&unit_tet(), &cfg(Backend::Float)).unwrap();
        let h = Hyperplane4::new(3.0, 3.0, 3.0, 0.0, tag(0));
        p.cut(&h).unwrap();
        assert!(p.vertex(0).alive);
        assert!(p.vertex(0).planes.contains(super::super::FIRST_FIELD));
        p.check_consistency().unwrap();
        assert!(p.max_violation() < 1e-9);
    }

    #[test]
    fn exact_encoding_matches_float_vertex() {
        let h = Hyperplane4::new(0.7, -0.4, 0.2, 0.6, tag(0));
        let mut pf = init_prism(&unit_tet(), &cfg(Backend::Float)).unwrap();
        let mut pe = init_prism(&unit_tet(), &cfg(Backend::Exact)).unwrap();
        let cf = pf.cut(&h).unwrap();
        let ce = pe.cut(&h).unwrap();
        assert_eq!(cf.len(), ce.len());
        for (a, b) in cf.iter().zip(&ce) {
            let enc = pe.vertex(*b).encoding().unwrap();
            let coords = intersect_planes(enc.map(|id| pe.plane(id).exact().unwrap())).unwrap();
            for k in 0..4 {
                assert!((to_f64(&coords[k]) - pf.vertex(*a).pos[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_fields_meet_on_bisector() {
        let mut p = init_prism(&unit_tet(), &cfg(Backend::Float)).unwrap();
        p.cut(&Hyperplane4::new(1.0, 0.0, 0.0, 0.1, tag(0))).unwrap();
        p.cut(&Hyperplane4::new(-1.0, 0.0, 0.0, 0.9, tag(1))).unwrap();
        p.check_consistency().unwrap();
        for (_, v) in p.alive_vertices() {
            let x = Vec3::new(v.pos[0], v.pos[1], v.pos[2]);
            let env = (x.x + 0.1).min(0.9 - x.x);
            assert!(v.d() <= env + 1e-12);
        }
    }

}
