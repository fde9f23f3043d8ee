use crate::geom::Vec3;
use crate::linear_field::GeneratorTag;
use crate::mesh_io::CellComplex;

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub polygon: Vec<Vec3>,
    pub labels: (GeneratorTag, GeneratorTag),
}

/// Envelope facets produced by one tet.
#[derive(Clone, Debug, PartialEq)]
pub struct TetFacets {
    pub tet: usize,
    pub facets: Vec<Facet>,
    pub discovered: usize,
    pub cuts: usize,
    pub exact_fallback: bool,
}

/// Concatenates per-tet facets in increasing tet order, then optionally
/// welds vertices closer than the tolerance.
pub fn assemble(per_tet: &[TetFacets], weld_tolerance: Option<f64>) -> CellComplex {
    let mut order: Vec<&TetFacets> = per_tet.iter().collect();
    order.sort_by_key(|t| t.tet);
    let mut cc = CellComplex::default();
    for t in order {
        for f in &t.facets {
            cc.push_polygon(&f.polygon, f.labels, t.tet);
        }
    }
    if let Some(tol) = weld_tolerance {
        cc.weld(tol);
    }
    cc
}
