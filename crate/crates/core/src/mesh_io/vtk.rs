//! Legacy VTK ASCII unstructured grids. Cells of type 10 (tetra) are read,
//! everything else is skipped.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::TetMesh;

const VTK_TETRA: i64 = 10;

/// Whitespace tokens tagged with their line number.
struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(n, l)| l.split_whitespace().map(move |t| (n + 1, t)))
            .collect();
        Tokens { items, pos: 0 }
    }

    fn next(&mut self, path: &Path) -> Result<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| Error::parse(path, 0, "unexpected end of file"))?;
        self.pos += 1;
        Ok(t)
    }

    fn num<T: std::str::FromStr>(&mut self, path: &Path) -> Result<T> {
        let (line, t) = self.next(path)?;
        t.parse().map_err(|_| Error::parse(path, line, format!("expected a number, got `{t}`")))
    }
}

pub(super) fn parse(text: &str, path: &Path) -> Result<(Vec<Vec3>, Vec<[usize; 4]>)> {
    let mut header = text.lines();
    let first = header.next().unwrap_or("");
    if !first.starts_with("# vtk DataFile") {
        return Err(Error::parse(path, 1, "missing `# vtk DataFile` header"));
    }
    let _title = header.next();
    match header.next().map(str::trim) {
        Some(f) if f.eq_ignore_ascii_case("ASCII") => {}
        _ => return Err(Error::parse(path, 3, "only ASCII VTK files are supported")),
    }
    let body_start: usize = text.lines().take(3).map(|l| l.len() + 1).sum();
    let mut toks = Tokens::new(text.get(body_start.min(text.len())..).unwrap_or(""));
    // line numbers in `toks` are relative to the body
    let mut vertices = Vec::new();
    let mut cells: Vec<(usize, Vec<i64>)> = Vec::new();
    let mut types: Vec<i64> = Vec::new();
    let mut dataset_ok = false;
    while toks.pos < toks.items.len() {
        let (line, kw) = toks.next(path)?;
        match kw.to_ascii_uppercase().as_str() {
            "DATASET" => {
                let (line, kind) = toks.next(path)?;
                if !kind.eq_ignore_ascii_case("UNSTRUCTURED_GRID") {
                    return Err(Error::parse(path, line + 3, format!("unsupported dataset `{kind}`")));
                }
                dataset_ok = true;
            }
            "POINTS" => {
                let n: usize = toks.num(path)?;
                let _dtype = toks.next(path)?;
                vertices.reserve(n);
                for _ in 0..n {
                    let c: [f64; 3] = [toks.num(path)?, toks.num(path)?, toks.num(path)?];
                    vertices.push(Vec3::from(c));
                }
            }
            "CELLS" => {
                let n: usize = toks.num(path)?;
                let _size: usize = toks.num(path)?;
                for _ in 0..n {
                    let (line, k) = toks.next(path)?;
                    let k: usize = k.parse().map_err(|_| Error::parse(path, line + 3, "bad cell size"))?;
                    let ids = (0..k).map(|_| toks.num::<i64>(path)).collect::<Result<Vec<_>>>()?;
                    cells.push((line + 3, ids));
                }
            }
            "CELL_TYPES" => {
                let n: usize = toks.num(path)?;
                types = (0..n).map(|_| toks.num::<i64>(path)).collect::<Result<_>>()?;
            }
            // attribute sections come last; nothing after them is needed
            "CELL_DATA" | "POINT_DATA" => break,
            _ => return Err(Error::parse(path, line + 3, format!("unexpected token `{kw}`"))),
        }
    }
    if !dataset_ok {
        return Err(Error::parse(path, 4, "missing DATASET UNSTRUCTURED_GRID"));
    }
    if types.len() != cells.len() {
        return Err(Error::parse(path, 0, format!("{} cells but {} cell types", cells.len(), types.len())));
    }
    let mut tets = Vec::new();
    for ((line, ids), ty) in cells.into_iter().zip(types) {
        if ty != VTK_TETRA {
            continue;
        }
        if ids.len() != 4 {
            return Err(Error::parse(path, line, "tetra cell needs 4 points"));
        }
        let mut t = [0usize; 4];
        for (slot, id) in t.iter_mut().zip(ids) {
            if id < 0 || id as usize >= vertices.len() {
                return Err(Error::parse(path, line, format!("point index {id} out of range")));
            }
            *slot = id as usize;
        }
        tets.push(t);
    }
    Ok((vertices, tets))
}

pub fn write_vtk(mesh: &TetMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\npatchvoronoi tet mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {} double", mesh.vertices.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    writeln!(s, "CELLS {} {}", mesh.tets.len(), 5 * mesh.tets.len()).unwrap();
    for t in &mesh.tets {
        writeln!(s, "4 {} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
    }
    writeln!(s, "CELL_TYPES {}", mesh.tets.len()).unwrap();
    for _ in &mesh.tets {
        writeln!(s, "{VTK_TETRA}").unwrap();
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
