//! Finite atlases with smooth partitions of unity.
//!
//! Each chart carries an unnormalized C^∞ bump `ψ_α(u) = exp(−1/(1−t²))`
//! (zero for `|t| ≥ 1`) whose open support equals the chart domain (circle)
//! or a cap strictly inside it (sphere). The partition of unity is
//! `ρ_α = ψ_α / Σ_β ψ_β`; the supports cover the manifold so the
//! denominator never vanishes.

use std::f64::consts::PI;

use num_rational::Ratio;

use super::embedding::{Embedding, ManifoldDescriptor, Shape};
use super::sample::Sample;
use crate::error::{Error, Result};
use crate::transport::{DiscreteMass, WeightedPointCloud};

/// Half-width of both circle chart windows.
pub const CIRCLE_HALF_WIDTH: f64 = 3.0 * PI / 4.0;

/// A sphere cap bump is positive where `sign·u_axis > SPHERE_CAP_FLOOR`.
pub const SPHERE_CAP_FLOOR: f64 = 0.1;

fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Wraps an angle into (center − π, center + π].
fn wrap_around(theta: f64, center: f64) -> f64 {
    let mut a = (theta - center).rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    center + a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    /// Open arc `(center − half_width, center + half_width)`; coordinate is
    /// the angle unwrapped around `center`.
    Arc { center: f64, half_width: f64 },
    /// Open hemisphere `sign·u[axis] > 0`; coordinates are the two remaining
    /// span coordinates in increasing index order.
    Hemisphere { axis: usize, sign: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub index: usize,
    pub kind: ChartKind,
}

impl Chart {
    /// Membership of a lifted unit vector in the chart domain.
    fn contains_unit(&self, u: &[f64]) -> bool {
        match self.kind {
            ChartKind::Arc { center, half_width } => {
                let theta = wrap_around(u[1].atan2(u[0]), center);
                (theta - center).abs() < half_width
            }
            ChartKind::Hemisphere { axis, sign } => sign * u[axis] > 0.0,
        }
    }

    fn forward_unit(&self, u: &[f64]) -> Vec<f64> {
        match self.kind {
            ChartKind::Arc { center, .. } => vec![wrap_around(u[1].atan2(u[0]), center)],
            ChartKind::Hemisphere { axis, .. } => {
                (0..3).filter(|&i| i != axis).map(|i| u[i]).collect()
            }
        }
    }

    fn bump_unit(&self, u: &[f64]) -> f64 {
        match self.kind {
            ChartKind::Arc { center, half_width } => {
                let theta = wrap_around(u[1].atan2(u[0]), center);
                bump((theta - center) / half_width)
            }
            ChartKind::Hemisphere { axis, sign } => {
                bump((1.0 - sign * u[axis]) / (1.0 - SPHERE_CAP_FLOOR))
            }
        }
    }

    /// Inverse chart map back to the unit vector in the span.
    fn inverse_unit(&self, coords: &[f64]) -> Vec<f64> {
        match self.kind {
            ChartKind::Arc { .. } => vec![coords[0].cos(), coords[0].sin()],
            ChartKind::Hemisphere { axis, sign } => {
                let rest = (1.0 - coords[0] * coords[0] - coords[1] * coords[1]).max(0.0);
                let mut u = vec![0.0; 3];
                let mut it = coords.iter();
                for (i, slot) in u.iter_mut().enumerate() {
                    *slot = if i == axis {
                        sign * rest.sqrt()
                    } else {
                        *it.next().unwrap()
                    };
                }
                u
            }
        }
    }
}

/// Where a sample point landed: its chart and its chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub chart: usize,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Atlas {
    embedding: Embedding,
    charts: Vec<Chart>,
    descriptor: ManifoldDescriptor,
}

/// Two-chart atlas of the unit circle embedded in R^D.
///
/// Chart 0 covers angles (−3π/4, 3π/4) and chart 1 covers (π/4, 7π/4).
pub fn build_circle_atlas(
    ambient_dim: usize,
    rotation_seed: u64,
) -> Result<(Atlas, ManifoldDescriptor)> {
    let descriptor = ManifoldDescriptor::new(Shape::Circle, ambient_dim, rotation_seed)?;
    let atlas = Atlas::new(&descriptor)?;
    Ok((atlas, descriptor))
}

/// Six-chart atlas of the unit sphere S² embedded in R^D, one chart per
/// coordinate hemisphere.
pub fn build_sphere_atlas(
    ambient_dim: usize,
    rotation_seed: u64,
) -> Result<(Atlas, ManifoldDescriptor)> {
    let descriptor = ManifoldDescriptor::new(Shape::Sphere, ambient_dim, rotation_seed)?;
    let atlas = Atlas::new(&descriptor)?;
    Ok((atlas, descriptor))
}

fn standard_charts(shape: Shape) -> Vec<Chart> {
    match shape {
        Shape::Circle => [0.0, PI]
            .iter()
            .enumerate()
            .map(|(index, &center)| Chart {
                index,
                kind: ChartKind::Arc {
                    center,
                    half_width: CIRCLE_HALF_WIDTH,
                },
            })
            .collect(),
        Shape::Sphere => (0..6)
            .map(|index| Chart {
                index,
                kind: ChartKind::Hemisphere {
                    axis: index / 2,
                    sign: if index % 2 == 0 { 1.0 } else { -1.0 },
                },
            })
            .collect(),
    }
}

impl Atlas {
    pub fn new(descriptor: &ManifoldDescriptor) -> Result<Self> {
        Ok(Self::with_embedding(
            Embedding::new(descriptor)?,
            descriptor.clone(),
        ))
    }

    /// Atlas over an explicit embedding (e.g. an unrotated one).
    pub fn with_embedding(embedding: Embedding, descriptor: ManifoldDescriptor) -> Self {
        let charts = standard_charts(embedding.shape());
        Self {
            embedding,
            charts,
            descriptor,
        }
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn descriptor(&self) -> &ManifoldDescriptor {
        &self.descriptor
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.embedding.shape().intrinsic_dim()
    }

    fn chart(&self, alpha: usize) -> Result<&Chart> {
        self.charts
            .get(alpha)
            .ok_or_else(|| Error::InvalidArgument(format!("chart index {alpha} out of range")))
    }

    /// Whether `x` lies in the domain of chart `alpha`.
    pub fn membership(&self, alpha: usize, x: &[f64]) -> Result<bool> {
        let chart = self.chart(alpha)?;
        Ok(chart.contains_unit(&self.embedding.lift(x)?))
    }

    /// Chart coordinates of `x` under chart `alpha`.
    pub fn forward(&self, alpha: usize, x: &[f64]) -> Result<Vec<f64>> {
        let chart = self.chart(alpha)?;
        let u = self.embedding.lift(x)?;
        if !chart.contains_unit(&u) {
            return Err(Error::InvalidArgument(format!(
                "point outside chart {alpha}"
            )));
        }
        Ok(chart.forward_unit(&u))
    }

    /// Analytic inverse of [`forward`](Self::forward).
    pub fn inverse(&self, alpha: usize, coords: &[f64]) -> Result<Vec<f64>> {
        let chart = self.chart(alpha)?;
        if coords.len() != self.intrinsic_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.intrinsic_dim(),
                got: coords.len(),
            });
        }
        Ok(self.embedding.embed(&chart.inverse_unit(coords)))
    }

    fn weights_unit(&self, u: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = self.charts.iter().map(|c| c.bump_unit(u)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|r| r / total).collect()
    }

    /// The partition-of-unity weights `(ρ_α(x))_α`.
    pub fn partition_weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.weights_unit(&self.embedding.lift(x)?))
    }

    /// Chart assignment (argmax of the unity weights, lowest index on ties)
    /// together with the chart coordinates of `x`.
    pub fn place(&self, x: &[f64]) -> Result<Placement> {
        let u = self.embedding.lift(x)?;
        let chart = argmax_lowest(&self.weights_unit(&u));
        Ok(Placement {
            chart,
            coords: self.charts[chart].forward_unit(&u),
        })
    }

    pub fn assign(&self, x: &[f64]) -> Result<usize> {
        Ok(self.place(x)?.chart)
    }

    pub fn place_all(&self, sample: &Sample) -> Result<Vec<Placement>> {
        sample.points.iter().map(|x| self.place(x)).collect()
    }

    /// Empirical chart masses `(#{x_i assigned to α} / n)_α`.
    pub fn chart_masses(&self, sample: &Sample) -> Result<DiscreteMass> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let placements = self.place_all(sample)?;
        Ok(masses_from_placements(self.len(), &placements))
    }

    /// Pushforward through chart `alpha` of the empirical measure conditioned
    /// on the points assigned to `alpha`.
    pub fn push_to_chart(&self, alpha: usize, sample: &Sample) -> Result<WeightedPointCloud> {
        self.chart(alpha)?;
        let placements = self.place_all(sample)?;
        cloud_from_placements(alpha, &placements)
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_lowest(weights: &[f64]) -> usize {
    let mut best = 0;
    for (i, w) in weights.iter().enumerate().skip(1) {
        if *w > weights[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn masses_from_placements(charts: usize, placements: &[Placement]) -> DiscreteMass {
    let mut counts = vec![0u64; charts];
    for p in placements {
        counts[p.chart] += 1;
    }
    let n = placements.len() as u64;
    DiscreteMass::from_ratios(counts.into_iter().map(|c| Ratio::new(c, n)).collect())
        .expect("counts over a nonempty sample sum to one")
}

pub(crate) fn cloud_from_placements(
    alpha: usize,
    placements: &[Placement],
) -> Result<WeightedPointCloud> {
    let points: Vec<Vec<f64>> = placements
        .iter()
        .filter(|p| p.chart == alpha)
        .map(|p| p.coords.clone())
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyChart { chart: alpha });
    }
    WeightedPointCloud::uniform(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::embedding::Embedding;

    fn flat_circle(dim: usize) -> Atlas {
        let d = ManifoldDescriptor::new(Shape::Circle, dim, 0).unwrap();
        Atlas::with_embedding(Embedding::unrotated(Shape::Circle, dim).unwrap(), d)
    }

    #[test]
    fn circle_weights_at_reference_angles() {
        let (atlas, desc) = build_circle_atlas(2, 0).unwrap();
        assert_eq!(desc.intrinsic_dim, 1);
        let e = atlas.embedding();
        assert_eq!(
            atlas.partition_weights(&e.embed_angle(0.0)).unwrap(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            atlas.partition_weights(&e.embed_angle(PI)).unwrap(),
            vec![0.0, 1.0]
        );
        let w = atlas.partition_weights(&e.embed_angle(PI / 2.0)).unwrap();
        assert!(w[0] > 0.0 && w[0] < 1.0);
        // The two windows are mirror images about π/2.
        assert!((w[0] - 0.5).abs() < 1e-12, "w = {}", w[0]);
        assert!((w[0] + w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_weight_regression() {
        // t0 = (π/3)/(3π/4) = 4/9 and t1 = (2π/3)/(3π/4) = 8/9.
        let atlas = flat_circle(2);
        let w = atlas
            .partition_weights(&[(PI / 3.0).cos(), (PI / 3.0).sin()])
            .unwrap();
        let a = (-1.0f64 / (1.0 - 16.0 / 81.0)).exp();
        let b = (-1.0f64 / (1.0 - 64.0 / 81.0)).exp();
        assert!((w[0] - a / (a + b)).abs() < 1e-14);
        assert!((w[0] - 0.971_211_046_399_952).abs() < 1e-12, "{}", w[0]);
    }

    #[test]
    fn unrotated_chart_coordinate_of_first_axis_is_zero() {
        let atlas = flat_circle(4);
        assert_eq!(atlas.forward(0, &[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![0.0]);
        let p = atlas.place(&[-1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.chart, 1);
        assert!((p.coords[0] - PI).abs() < 1e-15);
    }

    #[test]
    fn chart_masses_counts_and_tie_break() {
        let atlas = flat_circle(2);
        let pts = |angles: &[f64]| {
            Sample::new(angles.iter().map(|a| vec![a.cos(), a.sin()]).collect(), 0)
        };
        let m = atlas.chart_masses(&pts(&[0.0, 0.1, -0.2, 0.3])).unwrap();
        assert_eq!(m.as_f64(), vec![1.0, 0.0]);
        let m = atlas.chart_masses(&pts(&[0.0, 0.1, -0.2, PI])).unwrap();
        assert_eq!(m.masses()[0], Ratio::new(3, 4));
        assert_eq!(m.masses()[1], Ratio::new(1, 4));
        assert_eq!(argmax_lowest(&[0.5, 0.5]), 0);
        assert!(matches!(
            atlas.chart_masses(&Sample::new(vec![], 0)),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn push_to_chart_weights_and_empty_chart() {
        let atlas = flat_circle(3);
        let s = Sample::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 0);
        // π/2 is a tie: both points go to chart 0.
        let cloud = atlas.push_to_chart(0, &s).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.weights(), &[Ratio::new(1, 2), Ratio::new(1, 2)]);
        assert!(matches!(
            atlas.push_to_chart(1, &s),
            Err(Error::EmptyChart { chart: 1 })
        ));
    }

    #[test]
    fn off_manifold_point_is_a_domain_error() {
        let atlas = flat_circle(3);
        assert!(matches!(
            atlas.partition_weights(&[1.0, 0.0, 0.5]),
            Err(Error::OffManifold { .. })
        ));
    }

    #[test]
    fn sphere_atlas_covers_and_normalizes() {
        let (atlas, desc) = build_sphere_atlas(5, 2).unwrap();
        assert_eq!(desc.intrinsic_dim, 2);
        assert_eq!(atlas.len(), 6);
        let e = atlas.embedding();
        for k in 0..200 {
            let a = 0.37 * k as f64;
            let b = 0.11 * k as f64 - 1.3;
            let u = [b.cos() * a.cos(), b.cos() * a.sin(), b.sin()];
            let x = e.embed(&u);
            let w = atlas.partition_weights(&x).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (alpha, wa) in w.iter().enumerate() {
                if *wa > 0.0 {
                    assert!(atlas.membership(alpha, &x).unwrap());
                }
            }
            let p = atlas.place(&x).unwrap();
            let back = atlas.inverse(p.chart, &p.coords).unwrap();
            for (bi, xi) in back.iter().zip(&x) {
                assert!((bi - xi).abs() < 1e-9);
            }
        }
    }
}
