use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::linear_field::GeneratorTag;

use super::CellComplex;

pub(super) fn format_complex(cc: &CellComplex) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\ncomment patchvoronoi cell complex\n");
    writeln!(s, "element vertex {}", cc.vertices.len()).unwrap();
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    writeln!(s, "element face {}", cc.polygons.len()).unwrap();
    s.push_str("property list uint int vertex_indices\nproperty int label_a\nproperty int label_b\nend_header\n");
    for v in &cc.vertices {
        writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    for (poly, (a, b)) in cc.polygons.iter().zip(&cc.polygon_labels) {
        write!(s, "{}", poly.len()).unwrap();
        for v in poly {
            write!(s, " {v}").unwrap();
        }
        writeln!(s, " {} {}", a.encode(), b.encode()).unwrap();
    }
    s
}

pub(super) fn parse_complex(text: &str, path: &Path) -> Result<CellComplex> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim()));
    let mut nverts = None;
    let mut nfaces = None;
    for (line, l) in lines.by_ref() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["format", f, ..] if *f != "ascii" => return Err(Error::parse(path, line, "only ASCII PLY is supported")),
            ["element", "vertex", n] => nverts = n.parse::<usize>().ok(),
            ["element", "face", n] => nfaces = n.parse::<usize>().ok(),
            ["end_header"] => break,
            _ => {}
        }
    }
    let (Some(nverts), Some(nfaces)) = (nverts, nfaces) else {
        return Err(Error::parse(path, 1, "PLY header lacks vertex or face element"));
    };
    let mut cc = CellComplex::default();
    for _ in 0..nverts {
        let (line, l) = lines.next().ok_or_else(|| Error::parse(path, 0, "truncated vertex list"))?;
        let c: Vec<f64> = l.split_whitespace().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| Error::parse(path, line, "bad vertex"))?;
        if c.len() < 3 {
            return Err(Error::parse(path, line, "vertex needs 3 coordinates"));
        }
        cc.vertices.push(Vec3::new(c[0], c[1], c[2]));
    }
    for _ in 0..nfaces {
        let (line, l) = lines.next().ok_or_else(|| Error::parse(path, 0, "truncated face list"))?;
        let n: Vec<i64> = l.split_whitespace().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| Error::parse(path, line, "bad face"))?;
        let k = *n.first().ok_or_else(|| Error::parse(path, line, "empty face"))? as usize;
        if n.len() != k + 3 {
            return Err(Error::parse(path, line, "face needs indices plus label_a label_b"));
        }
        let idx = n[1..=k]
            .iter()
            .map(|&i| if i >= 0 && (i as usize) < nverts { Ok(i as usize) } else { Err(Error::parse(path, line, format!("index {i} out of range"))) })
            .collect::<Result<Vec<_>>>()?;
        cc.polygons.push(idx);
        cc.polygon_labels.push((GeneratorTag::decode(n[k + 1]), GeneratorTag::decode(n[k + 2])));
        cc.source_tet.push(0);
    }
    Ok(cc)
}
