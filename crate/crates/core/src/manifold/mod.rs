//! Embedded reference manifolds, their atlases, and samplers.

mod atlas;
mod embedding;
mod sample;

pub use atlas::{
    argmax_lowest, build_circle_atlas, build_sphere_atlas, Atlas, Chart, ChartKind, Placement,
    CIRCLE_HALF_WIDTH, SPHERE_CAP_FLOOR,
};
pub(crate) use atlas::{cloud_from_placements, masses_from_placements};
pub use embedding::{Embedding, ManifoldDescriptor, Shape, OFF_MANIFOLD_TOL};
pub use sample::{
    sample_distribution, sample_with_embedding, DistributionSpec, Family, Sample,
    UNIFORM_CIRCLE_DENSITY,
};
