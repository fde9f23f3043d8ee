//! Gmsh MSH v2 ASCII. Only nodes and 4-node tetrahedra (element type 4) are
//! read; other element types are skipped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::TetMesh;

const TET4: u32 = 4;

type Parsed = (Vec<Vec3>, Vec<[usize; 4]>);

pub(super) fn parse(text: &str, path: &Path) -> Result<Parsed> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim()));
    let mut vertices = Vec::new();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut tets = Vec::new();
    let mut raw_tets: Vec<(usize, [u64; 4])> = Vec::new();
    let mut seen_format = false;

    let mut next = |what: &str| -> Result<(usize, &str)> {
        lines.next().ok_or_else(|| Error::parse(path, 0, format!("unexpected end of file in {what}")))
    };

    loop {
        let (line, l) = match next("header") {
            Ok(x) => x,
            Err(_) => break,
        };
        match l {
            "$MeshFormat" => {
                let (line, fmt) = next("$MeshFormat")?;
                let mut it = fmt.split_whitespace();
                let version: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| Error::parse(path, line, "bad version"))?;
                let file_type = it.next().unwrap_or("0");
                if !(2.0..3.0).contains(&version) {
                    return Err(Error::parse(path, line, format!("unsupported MSH version {version}; need 2.x")));
                }
                if file_type != "0" {
                    return Err(Error::parse(path, line, "binary MSH is not supported"));
                }
                seen_format = true;
                let (line, end) = next("$MeshFormat")?;
                if end != "$EndMeshFormat" {
                    return Err(Error::parse(path, line, "expected $EndMeshFormat"));
                }
            }
            "$Nodes" => {
                let (line, count) = next("$Nodes")?;
                let count: usize = count.parse().map_err(|_| Error::parse(path, line, "bad node count"))?;
                for _ in 0..count {
                    let (line, l) = next("$Nodes")?;
                    let mut it = l.split_whitespace();
                    let id: u64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| Error::parse(path, line, "bad node id"))?;
                    let mut c = [0.0; 3];
                    for slot in &mut c {
                        *slot = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| Error::parse(path, line, "bad node coordinate"))?;
                    }
                    if node_index.insert(id, vertices.len()).is_some() {
                        return Err(Error::parse(path, line, format!("duplicate node id {id}")));
                    }
                    vertices.push(Vec3::from(c));
                }
                let (line, end) = next("$Nodes")?;
                if end != "$EndNodes" {
                    return Err(Error::parse(path, line, "expected $EndNodes"));
                }
            }
            "$Elements" => {
                let (line, count) = next("$Elements")?;
                let count: usize = count.parse().map_err(|_| Error::parse(path, line, "bad element count"))?;
                for _ in 0..count {
                    let (line, l) = next("$Elements")?;
                    let nums = l
                        .split_whitespace()
                        .map(|t| t.parse::<u64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| Error::parse(path, line, "bad element record"))?;
                    if nums.len() < 3 {
                        return Err(Error::parse(path, line, "truncated element record"));
                    }
                    let ntags = nums[2] as usize;
                    let nodes = &nums[(3 + ntags).min(nums.len())..];
                    if nums[1] as u32 == TET4 {
                        if nodes.len() != 4 {
                            return Err(Error::parse(path, line, "tetrahedron needs 4 nodes"));
                        }
                        raw_tets.push((line, [nodes[0], nodes[1], nodes[2], nodes[3]]));
                    }
                }
                let (line, end) = next("$Elements")?;
                if end != "$EndElements" {
                    return Err(Error::parse(path, line, "expected $EndElements"));
                }
            }
            "" => {}
            other if other.starts_with('$') => {
                // skip unknown sections
                let end = format!("$End{}", &other[1..]);
                loop {
                    let (_, l) = next(other)?;
                    if l == end {
                        break;
                    }
                }
            }
            _ => return Err(Error::parse(path, line, format!("unexpected line `{l}`"))),
        }
    }
    if !seen_format {
        return Err(Error::parse(path, 1, "missing $MeshFormat"));
    }
    for (line, ids) in raw_tets {
        let mut t = [0usize; 4];
        for (slot, id) in t.iter_mut().zip(ids) {
            *slot = *node_index.get(&id).ok_or_else(|| Error::parse(path, line, format!("unknown node {id}")))?;
        }
        tets.push(t);
    }
    Ok((vertices, tets))
}

pub fn write_msh(mesh: &TetMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    writeln!(s, "{}", mesh.vertices.len()).unwrap();
    for (i, v) in mesh.vertices.iter().enumerate() {
        writeln!(s, "{} {} {} {}", i + 1, v.x, v.y, v.z).unwrap();
    }
    s.push_str("$EndNodes\n$Elements\n");
    writeln!(s, "{}", mesh.tets.len()).unwrap();
    for (i, t) in mesh.tets.iter().enumerate() {
        writeln!(s, "{} 4 2 0 1 {} {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1).unwrap();
    }
    s.push_str("$EndElements\n");
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
