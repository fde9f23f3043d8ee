//! Voronoi diagram, medial axis and offset surfaces over a tet mesh.

mod assemble;
mod organic;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{centroid, Vec3};
use crate::linear_field::{GeneratorTag, MetricVariant, VariantKind};
use crate::mesh_io::{CellComplex, PatchedSurface, TetMesh, WELD_TOLERANCE};
use crate::polytope4::{Backend, CutConfig};
use crate::propagation::{refine_tet, seed_tet_with_owners, survival_filter_offset, PatchIndex, TetState};

pub use assemble::{assemble, Facet, TetFacets};
pub use organic::{filter_organic, patch_dihedral_angles, OrganicFilter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Product {
    Voronoi,
    MedialAxis,
    Offset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendPolicy {
    Float,
    Exact,
    /// Float cutting; a tet whose float cut turns inconsistent is redone exactly.
    #[default]
    FloatWithExactFallback,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub product: Product,
    pub variant: MetricVariant,
    /// Offset distance; required for [`Product::Offset`].
    pub offset_distance: Option<f64>,
    pub epsilon: f64,
    pub backend: BackendPolicy,
    /// Prism ceiling; derived from the domain size when unset.
    pub d_max: Option<f64>,
    /// Worker count; 0 picks the number of cores.
    pub threads: usize,
    pub organic_filter: Option<OrganicFilter>,
    pub weld: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            product: Product::Voronoi,
            variant: MetricVariant::ordinary(),
            offset_distance: None,
            epsilon: 1e-9,
            backend: BackendPolicy::default(),
            d_max: None,
            threads: 0,
            organic_filter: None,
            weld: true,
        }
    }
}

impl PipelineConfig {
    pub fn new(product: Product) -> Self {
        PipelineConfig { product, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.variant.validate()?;
        if !(self.epsilon >= 0.0) {
            return Err(Error::Validation(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if self.product == Product::Offset {
            match self.offset_distance {
                Some(d) if d > 0.0 && d.is_finite() => {}
                Some(d) => return Err(Error::Validation(format!("offset distance must be positive, got {d}"))),
                None => return Err(Error::Validation("offset requires an offset distance".into())),
            }
            if self.variant.kind != VariantKind::Vd {
                return Err(Error::Validation("offsets are defined for the ordinary distance only".into()));
            }
        }
        if let Some(d) = self.d_max {
            if !(d > 0.0) {
                return Err(Error::Validation(format!("d_max must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OffsetResult {
    pub inward: CellComplex,
    pub outward: CellComplex,
}

#[derive(Clone, Debug)]
pub enum ProductOutput {
    Complex(CellComplex),
    Offset(OffsetResult),
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StageSeconds {
    pub setup: f64,
    pub propagation: f64,
    pub assembly: f64,
    pub filter: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub product: Product,
    pub tets: usize,
    pub active_tets: usize,
    /// `discovered_histogram[k]` counts tets that discovered `k` generators.
    pub discovered_histogram: Vec<usize>,
    pub cuts: usize,
    pub facets: usize,
    pub exact_fallbacks: usize,
    pub threads: usize,
    pub seconds: StageSeconds,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub output: ProductOutput,
    pub stats: RunStats,
}

struct Context<'a> {
    tets: &'a TetMesh,
    index: PatchIndex,
    owners: Vec<usize>,
    base: CutConfig,
    product: Product,
    offset: f64,
    surface_tol: f64,
}

pub fn compute_voronoi(surface: &PatchedSurface, tets: &TetMesh, cfg: &PipelineConfig) -> Result<CellComplex> {
    let cfg = PipelineConfig { product: Product::Voronoi, ..cfg.clone() };
    match run(surface, tets, &cfg)?.output {
        ProductOutput::Complex(c) => Ok(c),
        ProductOutput::Offset(_) => unreachable!(),
    }
}

/// Medial axis of the region filled by `tets`; the tets must lie inside the surface.
pub fn compute_medial_axis(surface: &PatchedSurface, tets: &TetMesh, cfg: &PipelineConfig) -> Result<CellComplex> {
    let cfg = PipelineConfig { product: Product::MedialAxis, ..cfg.clone() };
    match run(surface, tets, &cfg)?.output {
        ProductOutput::Complex(c) => Ok(c),
        ProductOutput::Offset(_) => unreachable!(),
    }
}

/// Offset surfaces at distance `d`; the tets must cover the surface's
/// bounding box grown by more than `d`.
pub fn compute_offset(surface: &PatchedSurface, tets: &TetMesh, d: f64, cfg: &PipelineConfig) -> Result<OffsetResult> {
    let cfg = PipelineConfig { product: Product::Offset, offset_distance: Some(d), ..cfg.clone() };
    match run(surface, tets, &cfg)?.output {
        ProductOutput::Offset(o) => Ok(o),
        ProductOutput::Complex(_) => unreachable!(),
    }
}

pub fn run(surface: &PatchedSurface, tets: &TetMesh, cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if tets.is_empty() {
        return Err(Error::Validation("tet mesh is empty".into()));
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
    let index = PatchIndex::new(surface, cfg.variant.clone())?;
    let owners: Vec<usize> = pool.install(|| tets.vertices.par_iter().map(|v| index.nearest_patch(*v)).collect());
    let diag = surface.bbox().union(tets.bbox()).diagonal();
    let offset = cfg.offset_distance.unwrap_or(0.0);
    let d_max = cfg.d_max.unwrap_or_else(|| 2.0 * cfg.variant.transformed_upper_bound(diag) + diag).max(2.0 * offset + diag);
    let d_min = cfg.variant.transformed_lower_bound().min(0.0);
    let ctx = Context {
        tets,
        index,
        owners,
        base: CutConfig { epsilon: cfg.epsilon, backend: Backend::Float, d_min, d_max },
        product: cfg.product,
        offset,
        surface_tol: WELD_TOLERANCE * diag,
    };
    let setup = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let results: Vec<Result<TetFacets>> =
        pool.install(|| (0..tets.len()).into_par_iter().map(|i| process_with_policy(&ctx, i, cfg.backend)).collect());
    let per_tet = results.into_iter().collect::<Result<Vec<_>>>()?;
    let propagation = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let weld_tol = WELD_TOLERANCE * diag;
    let cc = assemble(&per_tet, cfg.weld.then_some(weld_tol));
    let assembly = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let output = match cfg.product {
        Product::Voronoi => ProductOutput::Complex(cc),
        Product::MedialAxis => ProductOutput::Complex(match &cfg.organic_filter {
            Some(f) => filter_organic(&cc, surface, f),
            None => cc,
        }),
        Product::Offset => ProductOutput::Offset(split_layers(cc, surface, &ctx.index, weld_tol)),
    };
    let filter = t.elapsed().as_secs_f64();

    let facets = match &output {
        ProductOutput::Complex(c) => c.len(),
        ProductOutput::Offset(o) => o.inward.len() + o.outward.len(),
    };
    let mut histogram = Vec::new();
    for t in &per_tet {
        if histogram.len() <= t.discovered {
            histogram.resize(t.discovered + 1, 0);
        }
        histogram[t.discovered] += 1;
    }
    let stats = RunStats {
        product: cfg.product,
        tets: tets.len(),
        active_tets: per_tet.iter().filter(|t| !t.facets.is_empty()).count(),
        discovered_histogram: histogram,
        cuts: per_tet.iter().map(|t| t.cuts).sum(),
        facets,
        exact_fallbacks: per_tet.iter().filter(|t| t.exact_fallback).count(),
        threads: pool.current_num_threads(),
        seconds: StageSeconds { setup, propagation, assembly, filter, total: start.elapsed().as_secs_f64() },
    };
    Ok(RunOutput { output, stats })
}

fn process_with_policy(ctx: &Context, i: usize, policy: BackendPolicy) -> Result<TetFacets> {
    match policy {
        BackendPolicy::Float => process_tet(ctx, i, Backend::Float),
        BackendPolicy::Exact => process_tet(ctx, i, Backend::Exact),
        BackendPolicy::FloatWithExactFallback => match process_tet(ctx, i, Backend::Float) {
            Err(e) if e.is_numerical() => {
                let mut out = process_tet(ctx, i, Backend::Exact)?;
                out.exact_fallback = true;
                Ok(out)
            }
            r => r,
        },
    }
}

fn process_tet(ctx: &Context, i: usize, backend: Backend) -> Result<TetFacets> {
    let tet = ctx.tets.tet(i);
    let owners = ctx.tets.tets[i].map(|v| ctx.owners[v]);
    let cfg = CutConfig { backend, ..ctx.base };
    let state = refine_tet(seed_tet_with_owners(i, &tet, owners, &ctx.index, &cfg)?, &ctx.index)?;
    let cuts = state.polytope.fields().count();
    let discovered = state.discovered.len();
    let facets = match ctx.product {
        Product::Voronoi | Product::MedialAxis => {
            let mut facets: Vec<Facet> = state
                .polytope
                .lower_envelope()
                .into_iter()
                .map(|f| Facet { polygon: f.polygon, labels: (f.tags[0], f.tags[1]) })
                .collect();
            if ctx.product == Product::MedialAxis {
                facets.retain(|f| !f.polygon.iter().all(|p| ctx.index.whole.nearest(*p).distance <= ctx.surface_tol));
            }
            facets
        }
        Product::Offset => offset_facets(state, ctx.offset)?,
    };
    Ok(TetFacets { tet: i, facets, discovered, cuts, exact_fallback: false })
}

/// For each surviving generator, cuts a copy of the polytope with the
/// mirrored field `2d − D` and keeps the facet where the two meet, which is
/// where the generator's distance equals `d` inside its own cell.
fn offset_facets(state: TetState, d: f64) -> Result<Vec<Facet>> {
    let state = survival_filter_offset(state, d);
    let mut out = Vec::new();
    if !state.active {
        return Ok(out);
    }
    for &p in &state.survivors {
        let values = state.values_of(p).expect("survivors are discovered");
        let mut poly = state.polytope.clone();
        let (real, virt) = (GeneratorTag::real(p), GeneratorTag::mirror(p));
        poly.cut_fitted(values.map(|v| 2.0 * d - v), virt)?;
        for f in poly.lower_envelope() {
            if f.tags == [real, virt] || f.tags == [virt, real] {
                out.push(Facet { polygon: f.polygon, labels: (real, virt) });
            }
        }
    }
    Ok(out)
}

/// Separates offset components lying inside the surface from those outside.
fn split_layers(cc: CellComplex, surface: &PatchedSurface, index: &PatchIndex, tol: f64) -> OffsetResult {
    let mut inward = vec![false; cc.len()];
    for comp in cc.components(tol) {
        let mut votes = 0i64;
        for &f in &comp {
            let c = centroid(&cc.polygon_points(f));
            let hit = index.whole.nearest(c);
            let n: Vec3 = surface.triangle_normal(hit.triangle);
            votes += if (c - hit.point).dot(n) < 0.0 { 1 } else { -1 };
        }
        if votes > 0 {
            for &f in &comp {
                inward[f] = true;
            }
        }
    }
    OffsetResult { inward: cc.retain(|i| inward[i]), outward: cc.retain(|i| !inward[i]) }
}
