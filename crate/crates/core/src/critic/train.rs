use serde::{Deserialize, Serialize};

use super::arch::CriticArchitecture;
use super::network::{gradient_unchecked, objective_unchecked, varies_on, Workspace};
use super::params::{project_in_place, CriticParams};
use crate::error::{Error, Result};
use crate::manifold::Sample;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub steps: usize,
    pub step_size: f64,
    /// Multiplies the step size after every step; 1 means constant.
    pub decay: f64,
    pub projection_period: usize,
    pub seed: u64,
    /// Defaults to `κ/√t` when unset.
    pub init_scale: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 300,
            step_size: 0.5,
            decay: 1.0,
            projection_period: 10,
            seed: 0,
            init_scale: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.projection_period == 0 || self.steps % self.projection_period != 0 {
            return Err(Error::InvalidArgument(format!(
                "projection period {} must divide steps {}",
                self.projection_period, self.steps
            )));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay must lie in (0, 1], got {}",
                self.decay
            )));
        }
        if let Some(s) = self.init_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "init scale must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedCritic {
    pub params: CriticParams,
    /// Final objective floored at zero.
    pub statistic: f64,
    /// Final objective before flooring.
    pub objective: f64,
}

/// Seeded uniform initialization followed by projection onto the class.
pub fn initial_params(arch: &CriticArchitecture, cfg: &TrainConfig) -> CriticParams {
    let scale = cfg
        .init_scale
        .unwrap_or(arch.weight_bound / (arch.width as f64).sqrt());
    let mut p = CriticParams::random_uniform(arch, scale, cfg.seed);
    project_in_place(arch, &mut p);
    p
}

/// Projected gradient ascent on `(1/n)Σ f(x_i) − (1/m)Σ f(y_j)`.
pub fn train_critic(
    arch: &CriticArchitecture,
    x: &Sample,
    y: &Sample,
    cfg: &TrainConfig,
) -> Result<TrainedCritic> {
    train_critic_points(arch, &x.points, &y.points, cfg)
}

pub fn train_critic_points(
    arch: &CriticArchitecture,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<TrainedCritic> {
    let init = live_initial_params(arch, xs, ys, cfg)?;
    train_critic_from(arch, xs, ys, cfg, init, |_| {})
}

/// Redraws allowed when the projected initialization has a zero gradient.
pub const INIT_ATTEMPTS: u64 = 32;

/// First initialization that is not constant on `xs ∪ ys`.
///
/// A sparse random draw often has no active path from the input to the
/// output. The critic is then constant and, since the budget is already
/// filled by larger entries, projection prunes every weight the gradient
/// tries to grow. Attempt 0 uses `cfg.seed`; attempt `a` uses
/// `derive_seed(cfg.seed, a)`. If every attempt is dead, attempt 0 is kept.
pub fn live_initial_params(
    arch: &CriticArchitecture,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<CriticParams> {
    arch.validate()?;
    cfg.validate()?;
    check_points(arch, xs, ys)?;
    let first = initial_params(arch, cfg);
    let mut ws = Workspace::new(&first);
    for attempt in 0..INIT_ATTEMPTS {
        let p = if attempt == 0 {
            first.clone()
        } else {
            initial_params(
                arch,
                &TrainConfig {
                    seed: derive_seed(cfg.seed, attempt),
                    ..*cfg
                },
            )
        };
        if varies_on(arch, &p, xs, ys, &mut ws) {
            return Ok(p);
        }
    }
    Ok(first)
}

fn check_points(arch: &CriticArchitecture, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(p) = xs.iter().chain(ys).find(|p| p.len() != arch.input_dim) {
        return Err(Error::DimensionMismatch {
            expected: arch.input_dim,
            got: p.len(),
        });
    }
    Ok(())
}

/// Training from an explicit starting point. `observe` sees the parameters
/// after every projection, including the final one.
pub fn train_critic_from(
    arch: &CriticArchitecture,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    cfg: &TrainConfig,
    init: CriticParams,
    mut observe: impl FnMut(&CriticParams),
) -> Result<TrainedCritic> {
    arch.validate()?;
    cfg.validate()?;
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySample);
    }
    init.conforms_to(arch)?;
    if let Some(p) = xs.iter().chain(ys).find(|p| p.len() != arch.input_dim) {
        return Err(Error::DimensionMismatch {
            expected: arch.input_dim,
            got: p.len(),
        });
    }

    let mut params = init;
    let mut ws = Workspace::new(&params);
    let len = params.values().len();
    let (mut gx, mut gy) = (vec![0.0; len], vec![0.0; len]);
    let mut lr = cfg.step_size;
    for step in 0..cfg.steps {
        gradient_unchecked(arch, &params, xs, ys, &mut gx, &mut gy, &mut ws);
        for (v, g) in params.values_mut().iter_mut().zip(&gx) {
            *v += lr * g;
        }
        lr *= cfg.decay;
        if (step + 1) % cfg.projection_period == 0 {
            project_in_place(arch, &mut params);
            observe(&params);
        }
    }
    project_in_place(arch, &mut params);
    observe(&params);
    let objective = objective_unchecked(arch, &params, xs, ys, &mut ws);
    Ok(TrainedCritic {
        params,
        statistic: objective.max(0.0),
        objective,
    })
}
