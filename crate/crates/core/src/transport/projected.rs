//! The chart-wise projected Wasserstein statistic
//! `T = max_α W₁((φ_α)_# p̂|α, (φ_α)_# q̂|α)`.

use serde::{Deserialize, Serialize};

use super::flow::wasserstein1;
use crate::error::{Error, Result};
use crate::manifold::{cloud_from_placements, Atlas, Placement, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartDistance {
    pub chart: usize,
    pub count_x: usize,
    pub count_y: usize,
    /// `None` when the chart was skipped.
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedStatistic {
    pub value: f64,
    pub charts: Vec<ChartDistance>,
}

/// Computes `T` between two samples.
///
/// Charts with no points on either side are ignored. A chart populated on
/// only one side is skipped when `skip_empty` is set and is an error
/// otherwise. If every chart is skipped the value is 0.
pub fn projected_t(
    atlas: &Atlas,
    x: &Sample,
    y: &Sample,
    skip_empty: bool,
) -> Result<ProjectedStatistic> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let px = atlas.place_all(x)?;
    let py = atlas.place_all(y)?;
    projected_t_from_placements(atlas.len(), &px, &py, skip_empty)
}

pub(crate) fn projected_t_from_placements(
    charts: usize,
    px: &[Placement],
    py: &[Placement],
    skip_empty: bool,
) -> Result<ProjectedStatistic> {
    let mut value: f64 = 0.0;
    let mut breakdown = Vec::with_capacity(charts);
    for alpha in 0..charts {
        let count_x = px.iter().filter(|p| p.chart == alpha).count();
        let count_y = py.iter().filter(|p| p.chart == alpha).count();
        let distance = match (count_x, count_y) {
            (0, 0) => None,
            (0, _) | (_, 0) if skip_empty => None,
            (0, _) | (_, 0) => return Err(Error::EmptyChart { chart: alpha }),
            _ => {
                let (w, _) = wasserstein1(
                    &cloud_from_placements(alpha, px)?,
                    &cloud_from_placements(alpha, py)?,
                )?;
                value = value.max(w);
                Some(w)
            }
        };
        breakdown.push(ChartDistance {
            chart: alpha,
            count_x,
            count_y,
            distance,
        });
    }
    Ok(ProjectedStatistic {
        value,
        charts: breakdown,
    })
}
