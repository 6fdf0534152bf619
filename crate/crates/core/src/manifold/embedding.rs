use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Off-manifold tolerance, relative to the norm of the queried point.
pub const OFF_MANIFOLD_TOL: f64 = 1e-9;

/// Reference manifolds with analytic atlases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// Unit circle S¹, intrinsic dimension 1.
    Circle,
    /// Unit sphere S², intrinsic dimension 2.
    Sphere,
}

impl Shape {
    pub fn intrinsic_dim(self) -> usize {
        match self {
            Shape::Circle => 1,
            Shape::Sphere => 2,
        }
    }

    /// Dimension of the linear span the unit manifold lives in before padding.
    pub fn span_dim(self) -> usize {
        self.intrinsic_dim() + 1
    }
}

/// Summary of an embedded manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldDescriptor {
    pub shape: Shape,
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    /// Coordinate-wise bound on embedded points.
    pub coord_bound: f64,
    /// Reach of the embedded manifold, when known.
    pub reach: Option<f64>,
    /// Seed of the random rotation applied after zero padding.
    pub rotation_seed: u64,
}

impl ManifoldDescriptor {
    pub fn new(shape: Shape, ambient_dim: usize, rotation_seed: u64) -> Result<Self> {
        if ambient_dim < shape.span_dim() {
            return Err(Error::InvalidDimension(format!(
                "{shape:?} needs ambient dimension >= {}, got {ambient_dim}",
                shape.span_dim()
            )));
        }
        Ok(Self {
            shape,
            intrinsic_dim: shape.intrinsic_dim(),
            ambient_dim,
            coord_bound: 1.0,
            reach: Some(1.0),
            rotation_seed,
        })
    }
}

/// Isometric embedding `x = Q [u; 0]` of the unit circle or sphere into R^D,
/// where `Q` is a seeded Haar-random orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    shape: Shape,
    dim: usize,
    /// Row-major D×D orthogonal matrix.
    rotation: Vec<f64>,
}

impl Embedding {
    pub fn new(descriptor: &ManifoldDescriptor) -> Result<Self> {
        let dim = descriptor.ambient_dim;
        if dim < descriptor.shape.span_dim() {
            return Err(Error::InvalidDimension(format!(
                "ambient dimension {dim} too small"
            )));
        }
        Ok(Self {
            shape: descriptor.shape,
            dim,
            rotation: random_orthogonal(dim, descriptor.rotation_seed),
        })
    }

    /// Embedding without rotation (zero padding only).
    pub fn unrotated(shape: Shape, dim: usize) -> Result<Self> {
        if dim < shape.span_dim() {
            return Err(Error::InvalidDimension(format!(
                "ambient dimension {dim} too small"
            )));
        }
        let mut rotation = vec![0.0; dim * dim];
        for i in 0..dim {
            rotation[i * dim + i] = 1.0;
        }
        Ok(Self {
            shape,
            dim,
            rotation,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Maps a unit vector of the span (length 2 or 3) into R^D.
    pub fn embed(&self, unit: &[f64]) -> Vec<f64> {
        let k = unit.len();
        (0..self.dim)
            .map(|i| {
                let row = &self.rotation[i * self.dim..i * self.dim + k];
                let v: f64 = row.iter().zip(unit).map(|(q, u)| q * u).sum();
                v.clamp(-1.0, 1.0)
            })
            .collect()
    }

    pub fn embed_angle(&self, theta: f64) -> Vec<f64> {
        self.embed(&[theta.cos(), theta.sin()])
    }

    /// Inverse of [`embed`](Self::embed): recovers the unit vector in the
    /// span, failing when `x` is farther than the tolerance from the manifold.
    pub fn lift(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let k = self.shape.span_dim();
        let mut span = vec![0.0; k];
        let mut normal_sq = 0.0;
        // y = Qᵀ x
        for j in 0..self.dim {
            let mut y = 0.0;
            for (i, xi) in x.iter().enumerate() {
                y += self.rotation[i * self.dim + j] * xi;
            }
            if j < k {
                span[j] = y;
            } else {
                normal_sq += y * y;
            }
        }
        let radius = span.iter().map(|v| v * v).sum::<f64>().sqrt();
        let distance = (normal_sq + (radius - 1.0).powi(2)).sqrt();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(distance <= OFF_MANIFOLD_TOL * norm) {
            return Err(Error::OffManifold { distance });
        }
        span.iter_mut().for_each(|v| *v /= radius);
        Ok(span)
    }

    /// Angle in (−π, π] of an ambient point on the embedded circle.
    pub fn angle(&self, x: &[f64]) -> Result<f64> {
        if self.shape != Shape::Circle {
            return Err(Error::InvalidArgument(
                "angle chart exists only for the circle".into(),
            ));
        }
        let u = self.lift(x)?;
        Ok(u[1].atan2(u[0]))
    }
}

/// Haar-distributed orthogonal matrix from the QR decomposition of a
/// Gaussian matrix, with the sign of each column fixed by `diag(R)`.
fn random_orthogonal(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = q[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_orthogonal() {
        let d = ManifoldDescriptor::new(Shape::Circle, 7, 11).unwrap();
        let e = Embedding::new(&d).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let dot: f64 = (0..7)
                    .map(|k| e.rotation[k * 7 + i] * e.rotation[k * 7 + j])
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lift_rejects_off_manifold_points() {
        let d = ManifoldDescriptor::new(Shape::Circle, 3, 0).unwrap();
        let e = Embedding::new(&d).unwrap();
        let mut x = e.embed_angle(0.4);
        x.iter_mut().for_each(|v| *v *= 1.01);
        match e.lift(&x) {
            Err(Error::OffManifold { distance }) => assert!((distance - 0.01).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_small_ambient_dimension() {
        assert!(matches!(
            ManifoldDescriptor::new(Shape::Circle, 1, 0),
            Err(Error::InvalidDimension(_))
        ));
        assert!(ManifoldDescriptor::new(Shape::Sphere, 2, 0).is_err());
    }

    #[test]
    fn angle_roundtrip() {
        let d = ManifoldDescriptor::new(Shape::Circle, 5, 3).unwrap();
        let e = Embedding::new(&d).unwrap();
        for k in 0..50 {
            let theta = -3.1 + 0.124 * k as f64;
            let x = e.embed_angle(theta);
            assert!((e.angle(&x).unwrap() - theta).abs() < 1e-12);
        }
    }
}
