use std::cmp::Ordering;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Points in R^d carrying positive rational weights that sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<Ratio<u64>>,
}

impl WeightedPointCloud {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<Ratio<u64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidDimension(
                "points must have at least one coordinate".into(),
            ));
        }
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| w.is_zero()) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let total = weights
            .iter()
            .fold(Ratio::zero(), |acc: Ratio<u64>, w| acc + w);
        if !total.is_one() {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    /// Each point with weight `1/n`.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len() as u64;
        if n == 0 {
            return Err(Error::EmptyCloud);
        }
        let weights = vec![Ratio::new(1, n); points.len()];
        Self::new(points, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[Ratio<u64>] {
        &self.weights
    }

    /// Shifts every point by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| p.iter().zip(offset).map(|(a, b)| a + b).collect())
            .collect();
        Self {
            dim: self.dim,
            points,
            weights: self.weights.clone(),
        }
    }

    /// Groups coincident points. Each group lists the original indices of its
    /// members in increasing order; groups are ordered lexicographically by
    /// coordinates.
    pub(crate) fn coincident_groups(&self) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&self.points[a], &self.points[b]).then(a.cmp(&b)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for idx in order {
            match groups.last_mut() {
                Some(g) if self.points[g[0]] == self.points[idx] => g.push(idx),
                _ => groups.push(vec![idx]),
            }
        }
        groups
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        // + 0.0 folds -0.0 into 0.0
        match (x + 0.0).total_cmp(&(y + 0.0)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}
