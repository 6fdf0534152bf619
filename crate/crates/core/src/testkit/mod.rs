//! The atlas, Hölder and critic two-sample tests with analytic and bootstrap
//! thresholds.

mod bootstrap;
mod procedures;
mod report;
mod thresholds;

pub use bootstrap::{bootstrap_quantile, bootstrap_threshold, BootstrapThreshold};
pub use procedures::{
    angle_chart_family, angle_coordinates, holder_test, nn_test, two_step_test, HolderOptions,
    NnOptions,
};
pub use report::{Decision, StepReport, StepStatus, TestReport};
pub use thresholds::{
    holder_threshold, nn_threshold, threshold_step1, threshold_step2, TestLevel, ThresholdSpec,
    MIN_REPLICATES,
};
