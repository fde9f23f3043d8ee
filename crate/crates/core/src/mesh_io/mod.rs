//! Input meshes, the labeled output complex, and their on-disk formats.
//!
//! Supported formats: OBJ (surfaces with `g`/`o` patch groups, and labeled
//! polygon soups), a sidecar label file with one patch id per triangle,
//! Gmsh MSH v2 ASCII and legacy VTK ASCII for tetrahedra, and ASCII PLY with
//! per-face `label_a`/`label_b` properties.

mod msh;
mod obj;
mod ply;
pub mod structured;
mod vtk;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{circumradius, tet_volume, triangle_area, Aabb, Vec3};
use crate::linear_field::GeneratorTag;

pub use msh::write_msh;
pub use obj::write_surface_obj;
pub use vtk::write_vtk;

/// Relative floors for degeneracy checks, scaled by the bounding-box diagonal.
pub const TRIANGLE_AREA_FLOOR: f64 = 1e-12;
pub const TET_VOLUME_FLOOR: f64 = 1e-14;
/// Relative vertex welding distance for output complexes.
pub const WELD_TOLERANCE: f64 = 1e-9;

/// Triangle mesh whose triangles are partitioned into generator patches.
#[derive(Clone, Debug)]
pub struct PatchedSurface {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub patch_of_triangle: Vec<usize>,
    /// Triangle indices of each patch, ascending.
    pub patches: Vec<Vec<usize>>,
    /// Patches that do not act as generators (e.g. sheet-metal side faces).
    pub excluded_patches: BTreeSet<usize>,
    pub patch_names: Vec<String>,
}

impl PatchedSurface {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, patch_of_triangle: Vec<usize>) -> Result<Self> {
        let count = patch_of_triangle.iter().copied().max().map_or(0, |m| m + 1);
        let names = (0..count).map(|p| format!("patch{p}")).collect();
        Self::with_names(vertices, triangles, patch_of_triangle, names)
    }

    pub fn with_names(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        patch_of_triangle: Vec<usize>,
        patch_names: Vec<String>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Validation("surface has no triangles".into()));
        }
        if patch_of_triangle.len() != triangles.len() {
            return Err(Error::Validation(format!(
                "{} patch labels for {} triangles",
                patch_of_triangle.len(),
                triangles.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite())) {
            return Err(Error::Validation(format!("vertex {i} has a non-finite coordinate")));
        }
        let diag = Aabb::from_points(&vertices).diagonal();
        let floor = TRIANGLE_AREA_FLOOR * diag * diag;
        for (i, t) in triangles.iter().enumerate() {
            if let Some(&bad) = t.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Validation(format!("triangle {i} references missing vertex {bad}")));
            }
            let area = triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if !(area > floor) {
                return Err(Error::Validation(format!("triangle {i} is degenerate (area {area:e})")));
            }
        }
        let count = patch_of_triangle.iter().copied().max().map_or(0, |m| m + 1);
        let mut patches = vec![Vec::new(); count];
        for (t, &p) in patch_of_triangle.iter().enumerate() {
            patches[p].push(t);
        }
        if let Some(p) = patches.iter().position(Vec::is_empty) {
            return Err(Error::Validation(format!("patch ids must be contiguous; patch {p} has no triangles")));
        }
        let mut patch_names = patch_names;
        patch_names.resize_with(count, String::new);
        Ok(PatchedSurface {
            vertices,
            triangles,
            patch_of_triangle,
            patches,
            excluded_patches: BTreeSet::new(),
            patch_names,
        })
    }

    pub fn patch_count(&self) -> usize {
        self.patches.len()
    }

    /// Patches that take part as generators.
    pub fn active_patches(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.patch_count()).filter(|p| !self.excluded_patches.contains(p))
    }

    pub fn exclude_patches(&mut self, ids: impl IntoIterator<Item = usize>) -> Result<()> {
        for id in ids {
            if id >= self.patch_count() {
                return Err(Error::PatchOutOfRange { patch: id, count: self.patch_count() });
            }
            self.excluded_patches.insert(id);
        }
        if self.active_patches().next().is_none() {
            return Err(Error::Validation("every patch is excluded".into()));
        }
        Ok(())
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    /// Unit normal following the counter-clockwise winding.
    pub fn triangle_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle(t);
        (b - a).cross(c - a).normalized()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Overrides group-derived labels with one patch id per triangle.
    pub fn relabel(self, labels: Vec<usize>) -> Result<Self> {
        PatchedSurface::new(self.vertices, self.triangles, labels)
    }
}

/// Tetrahedral domain in which the diagram is computed.
#[derive(Clone, Debug)]
pub struct TetMesh {
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    /// Circumradius of each tet.
    pub circumradii: Vec<f64>,
}

impl TetMesh {
    pub fn new(vertices: Vec<Vec3>, tets: Vec<[usize; 4]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite())) {
            return Err(Error::Validation(format!("vertex {i} has a non-finite coordinate")));
        }
        let diag = Aabb::from_points(&vertices).diagonal();
        let floor = TET_VOLUME_FLOOR * diag * diag * diag;
        let mut circumradii = Vec::with_capacity(tets.len());
        for (i, t) in tets.iter().enumerate() {
            if let Some(&bad) = t.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Validation(format!("tet {i} references missing vertex {bad}")));
            }
            let p = t.map(|v| vertices[v]);
            let vol = tet_volume(&p);
            if !(vol.abs() >= floor) || vol == 0.0 {
                return Err(Error::Validation(format!("tet {i} is degenerate (volume {vol:e})")));
            }
            circumradii.push(circumradius(&p));
        }
        Ok(TetMesh { vertices, tets, circumradii })
    }

    pub fn len(&self) -> usize {
        self.tets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tets.is_empty()
    }

    pub fn tet(&self, i: usize) -> [Vec3; 4] {
        self.tets[i].map(|v| self.vertices[v])
    }

    pub fn max_circumradius(&self) -> f64 {
        self.circumradii.iter().copied().fold(0.0, f64::max)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }
}

/// Labeled polygon soup assembled from per-tet envelope facets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellComplex {
    pub vertices: Vec<Vec3>,
    pub polygons: Vec<Vec<usize>>,
    /// Unordered generator pair of each polygon, stored with the smaller tag first.
    pub polygon_labels: Vec<(GeneratorTag, GeneratorTag)>,
    pub source_tet: Vec<usize>,
}

impl CellComplex {
    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    /// Appends a polygon with its own copies of the vertices.
    pub fn push_polygon(&mut self, pts: &[Vec3], labels: (GeneratorTag, GeneratorTag), tet: usize) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(pts);
        self.polygons.push((base..base + pts.len()).collect());
        self.polygon_labels.push(ordered(labels));
        self.source_tet.push(tet);
    }

    pub fn polygon_points(&self, i: usize) -> Vec<Vec3> {
        self.polygons[i].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Keeps the polygons for which `keep` returns true; unreferenced vertices are dropped.
    pub fn retain(&self, mut keep: impl FnMut(usize) -> bool) -> CellComplex {
        let mut out = CellComplex::default();
        let mut remap: HashMap<usize, usize> = HashMap::new();
        for i in 0..self.polygons.len() {
            if !keep(i) {
                continue;
            }
            let poly = self.polygons[i]
                .iter()
                .map(|&v| {
                    *remap.entry(v).or_insert_with(|| {
                        out.vertices.push(self.vertices[v]);
                        out.vertices.len() - 1
                    })
                })
                .collect();
            out.polygons.push(poly);
            out.polygon_labels.push(self.polygon_labels[i]);
            out.source_tet.push(self.source_tet[i]);
        }
        out
    }

    /// Merges vertices closer than `tol`. Earlier vertices absorb later ones,
    /// so the result depends only on vertex order.
    pub fn weld(&mut self, tol: f64) {
        if self.vertices.is_empty() {
            return;
        }
        let (remap, kept) = weld_points(&self.vertices, tol);
        self.vertices = kept;
        for poly in &mut self.polygons {
            let mut loop_: Vec<usize> = Vec::with_capacity(poly.len());
            for &v in poly.iter() {
                let r = remap[v];
                if loop_.last() != Some(&r) {
                    loop_.push(r);
                }
            }
            while loop_.len() > 1 && loop_.first() == loop_.last() {
                loop_.pop();
            }
            *poly = loop_;
        }
        // Collapsed polygons are dropped together with their labels.
        let keep: Vec<bool> = self.polygons.iter().map(|p| p.len() >= 3).collect();
        if keep.iter().all(|k| *k) {
            return;
        }
        let mut it = keep.iter();
        self.polygons.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.polygon_labels.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.source_tet.retain(|_| *it.next().unwrap());
    }

    /// Connected components of polygons sharing a vertex within `tol`.
    pub fn components(&self, tol: f64) -> Vec<Vec<usize>> {
        let (remap, kept) = weld_points(&self.vertices, tol);
        let mut parent: Vec<usize> = (0..kept.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for poly in &self.polygons {
            if let Some(&first) = poly.first() {
                let a = find(&mut parent, remap[first]);
                for &v in &poly[1..] {
                    let b = find(&mut parent, remap[v]);
                    if a != b {
                        let (lo, hi) = (a.min(b), a.max(b));
                        parent[hi] = lo;
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut index_of_root: HashMap<usize, usize> = HashMap::new();
        for (i, poly) in self.polygons.iter().enumerate() {
            let Some(&first) = poly.first() else { continue };
            let root = find(&mut parent, remap[first]);
            let g = *index_of_root.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        groups
    }
}

fn ordered((a, b): (GeneratorTag, GeneratorTag)) -> (GeneratorTag, GeneratorTag) {
    if b < a {
        (b, a)
    } else {
        (a, b)
    }
}

/// Grid-hashed welding. Returns the old→new index map and the kept points.
pub(crate) fn weld_points(points: &[Vec3], tol: f64) -> (Vec<usize>, Vec<Vec3>) {
    let cell = if tol > 0.0 { tol } else { f64::MIN_POSITIVE };
    let key = |p: Vec3| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut kept: Vec<Vec3> = Vec::new();
    let mut remap = Vec::with_capacity(points.len());
    for &p in points {
        let (kx, ky, kz) = key(p);
        let mut found: Option<usize> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &k in bucket {
                            if kept[k].distance(p) <= tol && found.is_none_or(|f| k < f) {
                                found = Some(k);
                            }
                        }
                    }
                }
            }
        }
        let id = found.unwrap_or_else(|| {
            kept.push(p);
            grid.entry((kx, ky, kz)).or_default().push(kept.len() - 1);
            kept.len() - 1
        });
        remap.push(id);
    }
    (remap, kept)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Obj,
    Ply,
}

impl OutputFormat {
    pub fn from_path(path: &Path) -> Option<OutputFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(OutputFormat::Obj),
            "ply" => Some(OutputFormat::Ply),
            _ => None,
        }
    }
}

/// Loads an OBJ surface. Patches come from `g`/`o` groups unless a sidecar
/// label file is given.
pub fn load_patched_surface(path: impl AsRef<Path>, labels: Option<&Path>) -> Result<PatchedSurface> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let surface = obj::parse_surface(&text, path)?;
    match labels {
        None => Ok(surface),
        Some(lp) => {
            let text = std::fs::read_to_string(lp).map_err(|e| Error::io(lp, e))?;
            let labels = parse_labels(&text, lp)?;
            if labels.len() != surface.triangles.len() {
                return Err(Error::Validation(format!(
                    "{}: {} labels for {} triangles",
                    lp.display(),
                    labels.len(),
                    surface.triangles.len()
                )));
            }
            surface.relabel(labels)
        }
    }
}

fn parse_labels(text: &str, path: &Path) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            out.push(tok.parse::<usize>().map_err(|_| Error::parse(path, n + 1, format!("bad patch id `{tok}`")))?);
        }
    }
    Ok(out)
}

/// Loads a tet mesh from `.msh` (v2 ASCII) or `.vtk` (legacy ASCII).
pub fn load_tet_mesh(path: impl AsRef<Path>) -> Result<TetMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_vtk = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("vtk"))
        || text.trim_start().starts_with("# vtk");
    let (vertices, tets) = if is_vtk { vtk::parse(&text, path)? } else { msh::parse(&text, path)? };
    TetMesh::new(vertices, tets)
}

pub fn write_cell_complex(cc: &CellComplex, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        OutputFormat::Obj => obj::format_complex(cc),
        OutputFormat::Ply => ply::format_complex(cc),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads back a complex written by [`write_cell_complex`].
pub fn read_cell_complex(path: impl AsRef<Path>) -> Result<CellComplex> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.starts_with("ply") {
        ply::parse_complex(&text, path)
    } else {
        obj::parse_complex(&text, path)
    }
}

pub fn format_cell_complex(cc: &CellComplex, format: OutputFormat) -> String {
    match format {
        OutputFormat::Obj => obj::format_complex(cc),
        OutputFormat::Ply => ply::format_complex(cc),
    }
}

/// Reads a weights file: lines of `patch_id weight`.
pub fn load_weights(path: impl AsRef<Path>, patch_count: usize) -> Result<Vec<Option<f64>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = vec![None; patch_count];
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(id), Some(w), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(path, n + 1, "expected `patch_id weight`"));
        };
        let id: usize = id.parse().map_err(|_| Error::parse(path, n + 1, format!("bad patch id `{id}`")))?;
        let w: f64 = w.parse().map_err(|_| Error::parse(path, n + 1, format!("bad weight `{w}`")))?;
        if id >= patch_count {
            return Err(Error::PatchOutOfRange { patch: id, count: patch_count });
        }
        out[id] = Some(w);
    }
    Ok(out)
}
