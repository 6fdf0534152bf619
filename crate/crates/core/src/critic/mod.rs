//! Sparse, bounded ReLU critics and their projected-gradient training.
//!
//! Parameters are clipped to `[−κ, κ]` and pruned to the `K` largest
//! magnitudes; the output passes through a final clamp to `[−R, R]`.

mod arch;
mod network;
mod params;
mod train;

pub use arch::{
    estimation_epsilon, hyperparams_from_theory, rate_exponent, CriticArchitecture, SizingConstants,
};
pub use network::{forward, objective, objective_gradient};
pub use params::{embed_into, negate_params, project_to_class, CriticParams};
pub use train::{
    initial_params, live_initial_params, train_critic, train_critic_from, train_critic_points,
    TrainConfig, TrainedCritic, INIT_ATTEMPTS,
};
