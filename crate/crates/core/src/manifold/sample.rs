use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::embedding::{Embedding, ManifoldDescriptor, Shape};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng64};

/// Distribution families supported on the reference manifolds.
///
/// Angles are in radians. The bump-perturbed family has density (w.r.t.
/// arc length) `1/(2π) + a·[b((θ−c)/w) − b((θ−c−π)/w)]` with the peak-one
/// bump `b(t) = exp(1 − 1/(1−t²))`, so it integrates to one for any `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    UniformCircle,
    VonMisesCircle {
        kappa: f64,
        mu: f64,
    },
    UniformSphere,
    BumpPerturbed {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub family: Family,
    pub manifold: ManifoldDescriptor,
}

/// Uniform density level of the circle w.r.t. arc length.
pub const UNIFORM_CIRCLE_DENSITY: f64 = 1.0 / (2.0 * PI);

impl DistributionSpec {
    pub fn new(family: Family, manifold: ManifoldDescriptor) -> Result<Self> {
        let spec = Self { family, manifold };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let shape = self.manifold.shape;
        match self.family {
            Family::UniformCircle
            | Family::VonMisesCircle { .. }
            | Family::BumpPerturbed { .. }
                if shape != Shape::Circle =>
            {
                Err(Error::InvalidArgument(format!(
                    "{:?} requires the circle",
                    self.family
                )))
            }
            Family::UniformSphere if shape != Shape::Sphere => Err(Error::InvalidArgument(
                "uniform-sphere requires the sphere".into(),
            )),
            Family::VonMisesCircle { kappa, mu }
                if !(kappa >= 0.0 && kappa.is_finite() && mu.is_finite()) =>
            {
                Err(Error::InvalidArgument(format!(
                    "von Mises kappa must be finite and >= 0, got {kappa}"
                )))
            }
            Family::BumpPerturbed {
                amplitude,
                center,
                width,
            } => {
                if !(amplitude.abs() < UNIFORM_CIRCLE_DENSITY) {
                    return Err(Error::InvalidArgument(format!(
                        "bump amplitude |{amplitude}| must be below the uniform density {UNIFORM_CIRCLE_DENSITY}"
                    )));
                }
                if !(width > 0.0 && width <= PI) || !center.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "bump width must lie in (0, π], got {width}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Density w.r.t. arc length for circle families, `None` otherwise.
    pub fn circle_density(&self, theta: f64) -> Option<f64> {
        match self.family {
            Family::UniformCircle => Some(UNIFORM_CIRCLE_DENSITY),
            Family::VonMisesCircle { kappa, mu } => {
                Some((kappa * (theta - mu).cos()).exp() / (2.0 * PI * bessel_i0(kappa)))
            }
            Family::BumpPerturbed {
                amplitude,
                center,
                width,
            } => {
                let up = peak_bump(angle_offset(theta, center) / width);
                let down = peak_bump(angle_offset(theta, center + PI) / width);
                Some(UNIFORM_CIRCLE_DENSITY + amplitude * (up - down))
            }
            Family::UniformSphere => None,
        }
    }
}

/// Points drawn from a distribution on an embedded manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub points: Vec<Vec<f64>>,
    pub spec: Option<DistributionSpec>,
    pub seed: u64,
}

impl Sample {
    pub fn new(points: Vec<Vec<f64>>, seed: u64) -> Self {
        Self {
            points,
            spec: None,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws `n` points from `spec`; deterministic in `(spec, n, seed)`.
pub fn sample_distribution(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Sample> {
    spec.validate()?;
    let embedding = Embedding::new(&spec.manifold)?;
    sample_with_embedding(spec, &embedding, n, seed)
}

/// Like [`sample_distribution`] with a prebuilt embedding, which must match
/// `spec.manifold`.
pub fn sample_with_embedding(
    spec: &DistributionSpec,
    embedding: &Embedding,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    let mut rng = rng_from_seed(seed);
    let points = (0..n)
        .map(|_| embedding.embed(&draw_unit(&spec.family, &mut rng)))
        .collect();
    Ok(Sample {
        points,
        spec: Some(spec.clone()),
        seed,
    })
}

fn draw_unit(family: &Family, rng: &mut Rng64) -> Vec<f64> {
    let theta = match *family {
        Family::UniformSphere => loop {
            let g: [f64; 3] = [
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            ];
            let r = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if r > 1e-12 {
                return g.iter().map(|v| v / r).collect();
            }
        },
        Family::UniformCircle => uniform_angle(rng),
        Family::VonMisesCircle { kappa, .. } if kappa == 0.0 => uniform_angle(rng),
        Family::VonMisesCircle { kappa, mu } => von_mises_angle(kappa, mu, rng),
        Family::BumpPerturbed {
            amplitude,
            center,
            width,
        } => {
            let envelope = UNIFORM_CIRCLE_DENSITY + amplitude.abs();
            loop {
                let theta = uniform_angle(rng);
                let up = peak_bump(angle_offset(theta, center) / width);
                let down = peak_bump(angle_offset(theta, center + PI) / width);
                let density = UNIFORM_CIRCLE_DENSITY + amplitude * (up - down);
                if rng.random::<f64>() * envelope <= density {
                    break theta;
                }
            }
        }
    };
    vec![theta.cos(), theta.sin()]
}

fn uniform_angle(rng: &mut Rng64) -> f64 {
    rng.random::<f64>() * 2.0 * PI - PI
}

/// Best–Fisher rejection sampler for the von Mises distribution.
fn von_mises_angle(kappa: f64, mu: f64, rng: &mut Rng64) -> f64 {
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    let f = loop {
        let u1: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.random();
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            break f;
        }
    };
    let u3: f64 = rng.random();
    let offset = f.clamp(-1.0, 1.0).acos();
    let theta = if u3 > 0.5 { mu + offset } else { mu - offset };
    angle_offset(theta, 0.0)
}

/// `theta − center` wrapped into (−π, π].
pub(crate) fn angle_offset(theta: f64, center: f64) -> f64 {
    let mut a = (theta - center).rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn peak_bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s > 0.0 {
        (1.0 - 1.0 / s).exp()
    } else {
        0.0
    }
}

/// Modified Bessel function I₀ by its power series.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(dim: usize) -> ManifoldDescriptor {
        ManifoldDescriptor::new(Shape::Circle, dim, 5).unwrap()
    }

    #[test]
    fn kappa_zero_matches_uniform_bit_for_bit() {
        let u = DistributionSpec::new(Family::UniformCircle, circle(4)).unwrap();
        let v = DistributionSpec::new(
            Family::VonMisesCircle {
                kappa: 0.0,
                mu: 1.0,
            },
            circle(4),
        )
        .unwrap();
        let a = sample_distribution(&u, 50, 9).unwrap();
        let b = sample_distribution(&v, 50, 9).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn deterministic_given_seed() {
        let v = DistributionSpec::new(
            Family::VonMisesCircle {
                kappa: 2.0,
                mu: 0.3,
            },
            circle(6),
        )
        .unwrap();
        assert_eq!(
            sample_distribution(&v, 64, 1).unwrap(),
            sample_distribution(&v, 64, 1).unwrap()
        );
        assert_ne!(
            sample_distribution(&v, 64, 1).unwrap().points,
            sample_distribution(&v, 64, 2).unwrap().points
        );
        assert!(sample_distribution(&v, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn bump_amplitude_must_keep_density_positive() {
        let bad = Family::BumpPerturbed {
            amplitude: UNIFORM_CIRCLE_DENSITY,
            center: 0.0,
            width: 1.0,
        };
        assert!(DistributionSpec::new(bad, circle(2)).is_err());
        let sphere = ManifoldDescriptor::new(Shape::Sphere, 3, 0).unwrap();
        assert!(DistributionSpec::new(Family::UniformCircle, sphere).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for family in [
            Family::UniformCircle,
            Family::VonMisesCircle {
                kappa: 2.0,
                mu: 0.7,
            },
            Family::BumpPerturbed {
                amplitude: 0.1,
                center: 0.5,
                width: 1.0,
            },
        ] {
            let spec = DistributionSpec::new(family, circle(2)).unwrap();
            let m = 20_000;
            let h = 2.0 * PI / m as f64;
            let total: f64 = (0..m)
                .map(|i| spec.circle_density(-PI + (i as f64 + 0.5) * h).unwrap() * h)
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
        }
    }

    #[test]
    fn von_mises_mean_resultant_length() {
        // E[cos(θ − μ)] = I₁(κ)/I₀(κ) ≈ 0.697775 for κ = 2.
        let spec = DistributionSpec::new(
            Family::VonMisesCircle {
                kappa: 2.0,
                mu: 1.0,
            },
            circle(2),
        )
        .unwrap();
        let e = Embedding::unrotated(Shape::Circle, 2).unwrap();
        let s = sample_with_embedding(&spec, &e, 40_000, 3).unwrap();
        let mean: f64 = s
            .points
            .iter()
            .map(|p| (p[1].atan2(p[0]) - 1.0).cos())
            .sum::<f64>()
            / 40_000.0;
        assert!((mean - 0.697_775).abs() < 0.01, "{mean}");
    }

    #[test]
    fn points_respect_coordinate_bound() {
        let spec = DistributionSpec::new(
            Family::UniformSphere,
            ManifoldDescriptor::new(Shape::Sphere, 8, 1).unwrap(),
        )
        .unwrap();
        let s = sample_distribution(&spec, 500, 4).unwrap();
        for p in &s.points {
            assert_eq!(p.len(), 8);
            assert!(p.iter().all(|v| v.abs() <= 1.0));
            let r: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }
}
