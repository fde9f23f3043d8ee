use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::linear_field::GeneratorTag;

use super::{CellComplex, PatchedSurface};

fn parse_vertex(toks: &mut std::str::SplitWhitespace<'_>, path: &Path, line: usize) -> Result<Vec3> {
    let mut c = [0.0; 3];
    for slot in &mut c {
        let tok = toks.next().ok_or_else(|| Error::parse(path, line, "vertex needs 3 coordinates"))?;
        *slot = tok.parse().map_err(|_| Error::parse(path, line, format!("bad coordinate `{tok}`")))?;
    }
    Ok(Vec3::from(c))
}

/// Resolves one `f` token (`i`, `i/t`, `i//n`, `i/t/n`, possibly negative).
fn face_index(tok: &str, nverts: usize, path: &Path, line: usize) -> Result<usize> {
    let head = tok.split('/').next().unwrap_or("");
    let i: i64 = head.parse().map_err(|_| Error::parse(path, line, format!("bad face index `{tok}`")))?;
    let idx = if i > 0 { i - 1 } else { nverts as i64 + i };
    if i == 0 || idx < 0 || idx as usize >= nverts {
        return Err(Error::parse(path, line, format!("face index {i} out of range")));
    }
    Ok(idx as usize)
}

pub(super) fn parse_surface(text: &str, path: &Path) -> Result<PatchedSurface> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut patch_of_triangle = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut current_group = String::from("default");
    let mut current_patch: Option<usize> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => vertices.push(parse_vertex(&mut toks, path, line)?),
            Some("g") | Some("o") => {
                let name = toks.collect::<Vec<_>>().join(" ");
                current_group = if name.is_empty() { "default".into() } else { name };
                current_patch = None;
            }
            Some("f") => {
                let idx = toks.map(|t| face_index(t, vertices.len(), path, line)).collect::<Result<Vec<_>>>()?;
                if idx.len() < 3 {
                    return Err(Error::parse(path, line, "face needs at least 3 vertices"));
                }
                let patch = *current_patch.get_or_insert_with(|| {
                    // groups may be reopened later in the file
                    names.iter().position(|g| *g == current_group).unwrap_or_else(|| {
                        names.push(current_group.clone());
                        names.len() - 1
                    })
                });
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                    patch_of_triangle.push(patch);
                }
            }
            _ => {}
        }
    }
    PatchedSurface::with_names(vertices, triangles, patch_of_triangle, names)
}

pub(super) fn format_complex(cc: &CellComplex) -> String {
    let mut s = String::new();
    writeln!(s, "# patchvoronoi cell complex").unwrap();
    writeln!(s, "# vertices {} polygons {}", cc.vertices.len(), cc.polygons.len()).unwrap();
    for v in &cc.vertices {
        writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for (poly, (a, b)) in cc.polygons.iter().zip(&cc.polygon_labels) {
        writeln!(s, "# labels {} {}", a.encode(), b.encode()).unwrap();
        s.push('f');
        for v in poly {
            write!(s, " {}", v + 1).unwrap();
        }
        s.push('\n');
    }
    s
}

pub(super) fn parse_complex(text: &str, path: &Path) -> Result<CellComplex> {
    let mut cc = CellComplex::default();
    let mut pending: Option<(GeneratorTag, GeneratorTag)> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            Some("v") => cc.vertices.push(parse_vertex(&mut toks, path, line)?),
            Some("#") => {
                if toks.next() == Some("labels") {
                    let mut tag = || -> Result<GeneratorTag> {
                        let t = toks.next().ok_or_else(|| Error::parse(path, line, "labels need two tags"))?;
                        let v: i64 = t.parse().map_err(|_| Error::parse(path, line, format!("bad tag `{t}`")))?;
                        Ok(GeneratorTag::decode(v))
                    };
                    pending = Some((tag()?, tag()?));
                }
            }
            Some("f") => {
                let idx = toks.map(|t| face_index(t, cc.vertices.len(), path, line)).collect::<Result<Vec<_>>>()?;
                let labels = pending.take().ok_or_else(|| Error::parse(path, line, "face without `# labels`"))?;
                cc.polygons.push(idx);
                cc.polygon_labels.push(labels);
                cc.source_tet.push(0);
            }
            _ => {}
        }
    }
    Ok(cc)
}

/// Writes a surface with one `g` group per patch.
pub fn write_surface_obj(surface: &PatchedSurface, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::new();
    for v in &surface.vertices {
        writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for (p, tris) in surface.patches.iter().enumerate() {
        let name = surface.patch_names.get(p).filter(|n| !n.is_empty()).cloned().unwrap_or(format!("patch{p}"));
        writeln!(s, "g {name}").unwrap();
        for &t in tris {
            let [a, b, c] = surface.triangles[t];
            writeln!(s, "f {} {} {}", a + 1, b + 1, c + 1).unwrap();
        }
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_GROUPS: &str = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
g bottom
f 1 2 3
f 1 3 4
g side
f 1/1 2/2 6/3
f 1//1 6//1 5//1
";

    #[test]
    fn groups_become_patches() {
        let s = parse_surface(TWO_GROUPS, Path::new("t.obj")).unwrap();
        assert_eq!(s.patch_count(), 2);
        assert_eq!(s.triangles.len(), 4);
        assert_eq!(s.patch_of_triangle, vec![0, 0, 1, 1]);
        assert_eq!(s.patch_names, vec!["bottom", "side"]);
    }

    #[test]
    fn zero_area_triangle_is_named() {
        let text = "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 4\nf 1 2 3\n";
        let err = parse_surface(text, Path::new("t.obj")).unwrap_err();
        assert!(err.to_string().contains("triangle 1"), "{err}");
    }

    #[test]
    fn quads_are_fanned_and_negative_indices_resolve() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4 -3 -2 -1\n";
        let s = parse_surface(text, Path::new("t.obj")).unwrap();
        assert_eq!(s.triangles, vec![[0, 1, 2], [0, 2, 3]]);
        assert_eq!(s.patch_count(), 1);
    }

    #[test]
    fn malformed_face_reports_line() {
        let text = "v 0 0 0\nv 1 0 0\nf 1 2 x\n";
        let err = parse_surface(text, Path::new("t.obj")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn quad_complex_serialization() {
        let mut cc = CellComplex::default();
        let sq = [
            Vec3::new(0.0, 0.0, 0.5),
            Vec3::new(1.0, 0.0, 0.5),
            Vec3::new(1.0, 1.0, 0.5),
            Vec3::new(0.0, 1.0, 0.5),
        ];
        cc.push_polygon(&sq, (GeneratorTag::real(0), GeneratorTag::real(1)), 0);
        let text = format_complex(&cc);
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);
        assert!(text.lines().any(|l| l == "# labels 0 1"));
        let back = parse_complex(&text, Path::new("t.obj")).unwrap();
        assert_eq!(back.vertices, cc.vertices);
        assert_eq!(back.polygons, cc.polygons);
        assert_eq!(back.polygon_labels, cc.polygon_labels);
    }

    #[test]
    fn empty_complex_is_valid() {
        let text = format_complex(&CellComplex::default());
        let back = parse_complex(&text, Path::new("t.obj")).unwrap();
        assert!(back.is_empty());
    }
}
