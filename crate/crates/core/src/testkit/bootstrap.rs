use rand::Rng;
use serde::{Deserialize, Serialize};

use super::thresholds::{TestLevel, MIN_REPLICATES};
use crate::error::{Error, Result};
use crate::manifold::Sample;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapThreshold {
    pub threshold: f64,
    /// Set when the pooled sample is a single repeated point; no
    /// replicates are drawn and the threshold is 0.
    pub degenerate: bool,
    pub replicates: usize,
}

/// `inf{t : #{s ≤ t}/N ≥ 1 − η}` over the replicate statistics.
pub fn bootstrap_quantile(statistics: &[f64], eta: f64) -> Result<f64> {
    let eta = TestLevel::new(eta)?.value();
    if statistics.is_empty() {
        return Err(Error::InvalidArgument("no bootstrap statistics".into()));
    }
    let mut sorted = statistics.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    for (i, &t) in sorted.iter().enumerate() {
        if i + 1 < sorted.len() && sorted[i + 1] == t {
            continue;
        }
        if (i + 1) as f64 / total >= 1.0 - eta {
            return Ok(t);
        }
    }
    Ok(*sorted.last().expect("nonempty"))
}

/// Pooled bootstrap over indices: replicate `b` draws `n_x + n_y` indices
/// with replacement from `0..n_x + n_y` using the stream
/// `derive_seed(seed, b)`, first `n_x` for the X side.
pub(crate) fn bootstrap_indexed(
    n_x: usize,
    n_y: usize,
    eta: f64,
    replicates: usize,
    seed: u64,
    degenerate: bool,
    mut statistic: impl FnMut(&[usize], &[usize]) -> Result<f64>,
) -> Result<BootstrapThreshold> {
    TestLevel::new(eta)?;
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    if n_x == 0 || n_y == 0 {
        return Err(Error::EmptySample);
    }
    if degenerate {
        return Ok(BootstrapThreshold {
            threshold: 0.0,
            degenerate: true,
            replicates: 0,
        });
    }
    let pooled = n_x + n_y;
    let mut stats = Vec::with_capacity(replicates);
    let mut ix = vec![0usize; n_x];
    let mut iy = vec![0usize; n_y];
    for b in 0..replicates {
        let mut rng = rng_from_seed(derive_seed(seed, b as u64));
        for slot in ix.iter_mut().chain(iy.iter_mut()) {
            *slot = rng.random_range(0..pooled);
        }
        stats.push(statistic(&ix, &iy)?);
    }
    Ok(BootstrapThreshold {
        threshold: bootstrap_quantile(&stats, eta)?,
        degenerate: false,
        replicates,
    })
}

pub(crate) fn all_identical(x: &[Vec<f64>], y: &[Vec<f64>]) -> bool {
    let first = x.first().or(y.first());
    match first {
        Some(f) => x.iter().chain(y).all(|p| p == f),
        None => true,
    }
}

/// Bootstrap threshold of an arbitrary two-sample statistic evaluated on
/// resampled point lists.
pub fn bootstrap_threshold(
    mut statistic: impl FnMut(&[Vec<f64>], &[Vec<f64>]) -> Result<f64>,
    x: &Sample,
    y: &Sample,
    eta: f64,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapThreshold> {
    let pooled: Vec<&Vec<f64>> = x.points.iter().chain(&y.points).collect();
    let degenerate = all_identical(&x.points, &y.points);
    bootstrap_indexed(
        x.len(),
        y.len(),
        eta,
        replicates,
        seed,
        degenerate,
        |ix, iy| {
            let xs: Vec<Vec<f64>> = ix.iter().map(|&i| pooled[i].clone()).collect();
            let ys: Vec<Vec<f64>> = iy.iter().map(|&i| pooled[i].clone()).collect();
            statistic(&xs, &ys)
        },
    )
}
