use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The class of depth-`L`, width-`t` ReLU networks `R^D → [−R, R]` with
/// entries bounded by `κ` and at most `K` nonzero parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticArchitecture {
    pub output_bound: f64,
    pub weight_bound: f64,
    pub depth: usize,
    pub width: usize,
    pub sparsity_budget: usize,
    pub input_dim: usize,
}

impl CriticArchitecture {
    pub fn new(
        output_bound: f64,
        weight_bound: f64,
        depth: usize,
        width: usize,
        sparsity_budget: usize,
        input_dim: usize,
    ) -> Result<Self> {
        let arch = Self {
            output_bound,
            weight_bound,
            depth,
            width,
            sparsity_budget,
            input_dim,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.output_bound > 0.0 && self.output_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "output bound must be positive, got {}",
                self.output_bound
            )));
        }
        if !(self.weight_bound > 0.0 && self.weight_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight bound must be positive, got {}",
                self.weight_bound
            )));
        }
        if self.depth == 0 || self.width == 0 || self.input_dim == 0 {
            return Err(Error::InvalidDimension(
                "depth, width and input dimension must be positive".into(),
            ));
        }
        if self.sparsity_budget < self.depth {
            return Err(Error::InvalidArgument(format!(
                "sparsity budget {} is below the depth {}",
                self.sparsity_budget, self.depth
            )));
        }
        Ok(())
    }

    /// `(rows, cols)` of each weight matrix, first layer first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        if self.depth == 1 {
            return vec![(1, self.input_dim)];
        }
        let mut shapes = vec![(self.width, self.input_dim)];
        shapes.extend(std::iter::repeat_n(
            (self.width, self.width),
            self.depth - 2,
        ));
        shapes.push((1, self.width));
        shapes
    }

    /// Total number of weights and biases.
    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(r, c)| r * c + r).sum()
    }
}

/// Multipliers for the order-of-magnitude sizing rule, plus the manifold
/// constants it depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizingConstants {
    pub depth: f64,
    pub width: f64,
    pub sparsity: f64,
    pub weight_bound: f64,
    pub coord_bound: f64,
    pub reach: f64,
}

impl Default for SizingConstants {
    fn default() -> Self {
        Self {
            depth: 1.0,
            width: 1.0,
            sparsity: 1.0,
            weight_bound: 1.0,
            coord_bound: 1.0,
            reach: 1.0,
        }
    }
}

/// `ceil` that ignores floating-point noise just above an integer, so that
/// e.g. `1000^(1/3) = 9.999999999999998` and `10.000000000000002` both give 10.
pub(crate) fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

fn check_smoothness(s: u32, beta: f64) -> Result<()> {
    if s < 1 {
        return Err(Error::Smoothness(format!(
            "integer smoothness s must be ≥ 1, got {s}"
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Smoothness(format!(
            "Hölder exponent β must lie in (0, 1], got {beta}"
        )));
    }
    Ok(())
}

/// The rate exponent `(s+β)/(2(s+β)+d)`.
pub fn rate_exponent(d: usize, s: u32, beta: f64) -> Result<f64> {
    check_smoothness(s, beta)?;
    let a = s as f64 + beta;
    Ok(a / (2.0 * a + d as f64))
}

/// Estimation error scale `ε = n^{−(s+β)/(2(s+β)+d)}`.
pub fn estimation_epsilon(n: usize, d: usize, s: u32, beta: f64) -> Result<f64> {
    Ok((n as f64).powf(-rate_exponent(d, s, beta)?))
}

/// Sizes the critic class from `(n, D, d, s, β)`:
///
/// * `R = 1`, `κ = max{1, B, √d, τ²}`
/// * `L = ⌈r·ln(nD)⌉` with `r = (s+β)/(2(s+β)+d)`
/// * `t = ⌈n^{d/(2(s+β)+d)}⌉ + D`
/// * `K = ⌈r·(n^{d/(2(s+β)+d)} + D)·ln n + D·ln D⌉`
///
/// each scaled by the matching multiplier in `constants`. `K` is raised to
/// `L` if needed.
pub fn hyperparams_from_theory(
    n: usize,
    ambient_dim: usize,
    d: usize,
    s: u32,
    beta: f64,
    constants: &SizingConstants,
) -> Result<CriticArchitecture> {
    check_smoothness(s, beta)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "sizing needs n ≥ 2, got {n}"
        )));
    }
    if d == 0 || d > ambient_dim {
        return Err(Error::InvalidDimension(format!(
            "need 1 ≤ d ≤ D, got d={d}, D={ambient_dim}"
        )));
    }
    let a = s as f64 + beta;
    let r = a / (2.0 * a + d as f64);
    let width_exp = d as f64 / (2.0 * a + d as f64);
    let (nf, df) = (n as f64, ambient_dim as f64);
    let n_pow = nf.powf(width_exp);

    let depth = ceil_tolerant(constants.depth * r * (nf * df).ln()).max(1);
    let width = ceil_tolerant(constants.width * n_pow).max(1) + ambient_dim;
    let sparsity =
        ceil_tolerant(constants.sparsity * (r * (n_pow + df) * nf.ln() + df * df.ln())).max(depth);
    let kappa = constants.weight_bound
        * 1f64
            .max(constants.coord_bound)
            .max((d as f64).sqrt())
            .max(constants.reach * constants.reach);
    CriticArchitecture::new(1.0, kappa, depth, width, sparsity, ambient_dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sizing() {
        let a = hyperparams_from_theory(1000, 10, 2, 1, 1.0, &SizingConstants::default()).unwrap();
        assert_eq!((a.width, a.depth, a.sparsity_budget), (20, 4, 70));
        assert_eq!(a.output_bound, 1.0);
        assert!((a.weight_bound - 2f64.sqrt()).abs() < 1e-15);
        assert!((rate_exponent(2, 1, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn doubling_n_never_shrinks() {
        let c = SizingConstants::default();
        for d in 1..=3 {
            let mut prev = hyperparams_from_theory(2, 6, d, 1, 1.0, &c).unwrap();
            let mut n = 4;
            while n <= 1 << 20 {
                let a = hyperparams_from_theory(n, 6, d, 1, 1.0, &c).unwrap();
                assert!(
                    a.depth >= prev.depth
                        && a.width >= prev.width
                        && a.sparsity_budget >= prev.sparsity_budget
                );
                prev = a;
                n *= 2;
            }
        }
    }

    #[test]
    fn smoothness_errors() {
        let c = SizingConstants::default();
        assert!(matches!(
            hyperparams_from_theory(10, 3, 1, 0, 1.0, &c),
            Err(Error::Smoothness(_))
        ));
        assert!(matches!(
            hyperparams_from_theory(10, 3, 1, 1, 1.5, &c),
            Err(Error::Smoothness(_))
        ));
        assert!(matches!(
            hyperparams_from_theory(10, 3, 1, 1, 0.0, &c),
            Err(Error::Smoothness(_))
        ));
    }

    #[test]
    fn shapes() {
        let a = CriticArchitecture::new(1.0, 1.0, 3, 4, 5, 2).unwrap();
        assert_eq!(a.layer_shapes(), vec![(4, 2), (4, 4), (1, 4)]);
        assert_eq!(a.parameter_count(), 12 + 20 + 5);
        let one = CriticArchitecture::new(1.0, 1.0, 1, 4, 1, 3).unwrap();
        assert_eq!(one.layer_shapes(), vec![(1, 3)]);
        assert!(CriticArchitecture::new(1.0, 1.0, 3, 4, 2, 2).is_err());
    }

    #[test]
    fn tolerant_ceiling() {
        assert_eq!(ceil_tolerant(1000f64.powf(1.0 / 3.0)), 10);
        assert_eq!(ceil_tolerant(3.07), 4);
        assert_eq!(ceil_tolerant(2.0), 2);
    }
}
