//! Per-tet discovery of the patches whose fields reach the lower envelope.
//!
//! A tet starts with the patches nearest to its corners. Every polytope
//! vertex created by a cut is queued; when a queued vertex is nearer to an
//! undiscovered patch, that patch's field is inserted too. The queue drains
//! once every remaining vertex is owned by a discovered patch.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::linear_field::{GeneratorTag, MetricVariant, VariantKind};
use crate::mesh_io::PatchedSurface;
use crate::polytope4::{init_prism, CutConfig, Polytope4, VertexId};
use crate::spatial_index::{build_bvh, Bvh, BvhScope, TIE_TOLERANCE};

/// Surface BVHs and the metric shared by every tet task.
#[derive(Clone, Debug)]
pub struct PatchIndex {
    pub whole: Bvh,
    per_patch: Vec<Option<Bvh>>,
    variant: MetricVariant,
    active: usize,
}

impl PatchIndex {
    pub fn new(surface: &PatchedSurface, variant: MetricVariant) -> Result<Self> {
        variant.validate()?;
        let whole = build_bvh(surface, BvhScope::Whole)?;
        let per_patch = (0..surface.patch_count())
            .map(|p| {
                if surface.excluded_patches.contains(&p) {
                    Ok(None)
                } else {
                    build_bvh(surface, BvhScope::Patch(p)).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let active = per_patch.iter().filter(|b| b.is_some()).count();
        Ok(PatchIndex { whole, per_patch, variant, active })
    }

    pub fn variant(&self) -> &MetricVariant {
        &self.variant
    }

    pub fn active_patches(&self) -> usize {
        self.active
    }

    pub fn patch_bvh(&self, patch: usize) -> Result<&Bvh> {
        self.per_patch
            .get(patch)
            .and_then(Option::as_ref)
            .ok_or(Error::PatchOutOfRange { patch, count: self.per_patch.len() })
    }

    /// Patch minimizing the transformed distance at `p`.
    ///
    /// The ordinary metric uses the whole-surface BVH. Weighted metrics can
    /// prefer a farther patch, so each patch is queried and ties go to the
    /// lowest id.
    pub fn nearest_patch(&self, p: Vec3) -> usize {
        if self.variant.kind == VariantKind::Vd {
            return self.whole.nearest(p).patch;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        for (patch, bvh) in self.per_patch.iter().enumerate() {
            let Some(bvh) = bvh else { continue };
            let Ok(v) = self.variant.transform(patch, bvh.nearest(p).distance) else { continue };
            if v < best.0 - TIE_TOLERANCE {
                best = (v, patch);
            }
        }
        best.1
    }

    /// Transformed distances from `patch` to the tet corners.
    pub fn field_values(&self, patch: usize, tet: &[Vec3; 4]) -> Result<[f64; 4]> {
        let bvh = self.patch_bvh(patch)?;
        let mut out = [0.0; 4];
        for (o, v) in out.iter_mut().zip(tet) {
            *o = self.variant.transform(patch, bvh.nearest(*v).distance)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct TetState {
    pub tet_index: usize,
    pub polytope: Polytope4,
    /// Real generators with a field in the polytope, in insertion order.
    pub discovered: Vec<GeneratorTag>,
    pub pending: VecDeque<VertexId>,
    /// Corner values of each discovered field, parallel to `discovered`.
    pub values: Vec<[f64; 4]>,
    /// Generators kept by the offset survival test.
    pub survivors: Vec<usize>,
    pub active: bool,
}

impl TetState {
    pub fn discovered_patches(&self) -> BTreeSet<usize> {
        self.discovered.iter().map(|t| t.patch).collect()
    }

    pub fn values_of(&self, patch: usize) -> Option<[f64; 4]> {
        self.discovered.iter().position(|t| t.patch == patch).map(|i| self.values[i])
    }

    fn insert(&mut self, patch: usize, index: &PatchIndex) -> Result<()> {
        let values = index.field_values(patch, self.polytope.tet())?;
        let tag = GeneratorTag::real(patch);
        let (_, created) = self.polytope.cut_fitted(values, tag)?;
        self.discovered.push(tag);
        self.values.push(values);
        self.pending.extend(created);
        Ok(())
    }
}

/// Inserts the fields of the patches nearest to the four corners.
pub fn seed_tet(tet_index: usize, tet: &[Vec3; 4], index: &PatchIndex, cfg: &CutConfig) -> Result<TetState> {
    let owners = tet.map(|v| index.nearest_patch(v));
    seed_tet_with_owners(tet_index, tet, owners, index, cfg)
}

/// As [`seed_tet`], with the corner owners already known.
pub fn seed_tet_with_owners(
    tet_index: usize,
    tet: &[Vec3; 4],
    owners: [usize; 4],
    index: &PatchIndex,
    cfg: &CutConfig,
) -> Result<TetState> {
    let mut state = TetState {
        tet_index,
        polytope: init_prism(tet, cfg)?,
        discovered: Vec::new(),
        pending: VecDeque::new(),
        values: Vec::new(),
        survivors: Vec::new(),
        active: true,
    };
    let seeds: BTreeSet<usize> = owners.into_iter().collect();
    for p in seeds {
        state.insert(p, index)?;
    }
    Ok(state)
}

/// Drains the queue, inserting every newly discovered patch.
pub fn refine_tet(mut state: TetState, index: &PatchIndex) -> Result<TetState> {
    while let Some(v) = state.pending.pop_front() {
        if !state.polytope.is_alive(v) {
            continue;
        }
        let p = index.nearest_patch(state.polytope.vertex(v).point3());
        if state.discovered.iter().any(|t| t.patch == p) {
            continue;
        }
        if state.discovered.len() >= index.active_patches() {
            return Err(Error::PropagationAbort {
                tet: state.tet_index,
                discovered: state.discovered.len() + 1,
                patches: index.active_patches(),
            });
        }
        state.insert(p, index)?;
    }
    Ok(state)
}

/// Keeps generators whose corner distances straddle `d`; a tet with none
/// left is marked inactive.
pub fn survival_filter_offset(mut state: TetState, d: f64) -> TetState {
    state.survivors = state
        .discovered
        .iter()
        .zip(&state.values)
        .filter(|(_, v)| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            lo <= d && d <= hi
        })
        .map(|(t, _)| t.patch)
        .collect();
    state.active = !state.survivors.is_empty();
    state
}
