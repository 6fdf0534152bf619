//! Hungarian-algorithm oracle for equal-size uniform clouds.

use super::cloud::WeightedPointCloud;
use crate::error::{Error, Result};

pub const ORACLE_MAX_POINTS: usize = 12;

/// `(1/n)·min over perfect matchings of Σ ‖x_i − y_σ(i)‖₂`.
pub fn assignment_oracle(x: &WeightedPointCloud, y: &WeightedPointCloud) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::OracleScope(format!(
            "cloud sizes differ: {n} vs {}",
            y.len()
        )));
    }
    if n == 0 || n > ORACLE_MAX_POINTS {
        return Err(Error::OracleScope(format!(
            "oracle handles 1..={ORACLE_MAX_POINTS} points, got {n}"
        )));
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let uniform = |c: &WeightedPointCloud| {
        c.weights()
            .iter()
            .all(|w| *w.numer() == 1 && *w.denom() == n as u64)
    };
    if !uniform(x) || !uniform(y) {
        return Err(Error::OracleScope("oracle requires uniform weights".into()));
    }
    let cost: Vec<Vec<f64>> = x
        .points()
        .iter()
        .map(|a| {
            y.points()
                .iter()
                .map(|b| {
                    a.iter()
                        .zip(b)
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    let matching = hungarian(&cost);
    let total: f64 = matching.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(total / n as f64)
}

/// Minimum-cost perfect matching on a square matrix; returns the column
/// matched to each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based potentials, column 0 is the virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}
