//! Two-sample tests for data on low-dimensional manifolds embedded in R^D.
//!
//! * [`manifold`]: reference manifolds, atlases, partitions of unity, samplers.
//! * [`transport`]: L2 divergence of chart masses, exact W₁, projected statistic.
//! * [`critic`]: sparse bounded ReLU critics and their training.
//! * [`holder`]: exact Hölder IPM on a quantized grid family (d = 1).
//! * [`testkit`]: the atlas, Hölder and critic tests with their thresholds.
//! * [`harness`]: Monte Carlo risk estimation, power curves, config files.

pub mod critic;
pub mod error;
pub mod harness;
pub mod holder;
pub mod manifold;
pub mod rng;
pub mod testkit;
pub mod transport;

pub use error::{Error, Result};
