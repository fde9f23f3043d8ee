//! Patch-aware Voronoi diagrams, medial axes and offsets of triangle
//! surfaces, computed tet by tet over a background tetrahedral mesh.
//!
//! Inside each tet the distance to every nearby surface patch is replaced by
//! the linear field through its four vertex values. The cell of a patch is
//! the region where its field is lowest, recovered as the top of a 4D
//! polytope cut by each field in turn.

pub mod error;
pub mod exact;
pub mod geom;
pub mod linear_field;
pub mod mesh_io;
pub mod pipeline;
pub mod polytope4;
pub mod propagation;
pub mod spatial_index;

pub use error::{Error, Result};
pub use geom::{Aabb, Vec3};
pub use linear_field::{GeneratorTag, Hyperplane4, MetricVariant, TagKind, VariantKind};
pub use mesh_io::{CellComplex, PatchedSurface, TetMesh};
pub use pipeline::{
    compute_medial_axis, compute_offset, compute_voronoi, BackendPolicy, OffsetResult, PipelineConfig, Product,
};
