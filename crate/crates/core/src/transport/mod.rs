//! Exact discrete divergences between mass vectors and point clouds.

mod cloud;
mod flow;
mod hungarian;
mod mass;
mod projected;

pub use cloud::WeightedPointCloud;
pub use flow::{wasserstein1, Flow, TransportPlan, MAX_SCALE};
pub use hungarian::{assignment_oracle, ORACLE_MAX_POINTS};
pub use mass::{l2_divergence, DiscreteMass};
pub use projected::{projected_t, ChartDistance, ProjectedStatistic};

pub(crate) use mass::ratio_to_f64;
pub(crate) use projected::projected_t_from_placements;
