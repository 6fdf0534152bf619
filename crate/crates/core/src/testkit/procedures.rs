use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::bootstrap::{all_identical, bootstrap_indexed};
use super::report::{Decision, StepReport, StepStatus, TestReport};
use super::thresholds::{
    holder_threshold, nn_threshold, threshold_step1, threshold_step2, TestLevel, ThresholdSpec,
};
use crate::critic::{
    hyperparams_from_theory, train_critic_points, CriticArchitecture, SizingConstants, TrainConfig,
};
use crate::error::{Error, Result};
use crate::holder::{oracle_ipm_points, GridFunctionFamily};
use crate::manifold::{masses_from_placements, Atlas, Placement, Sample, Shape};
use crate::rng::derive_seed;
use crate::transport::{l2_divergence, projected_t_from_placements};

fn equal_sizes(x: &Sample, y: &Sample) -> Result<usize> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(x.len(), y.len()));
    }
    Ok(x.len())
}

fn finish(
    test: &str,
    steps: Vec<StepReport>,
    eta: TestLevel,
    spec: &ThresholdSpec,
    n: usize,
    seed: Option<u64>,
    start: Instant,
) -> TestReport {
    let decision = if steps.iter().any(|s| s.status == StepStatus::Reject) {
        Decision::Reject
    } else {
        Decision::NotReject
    };
    TestReport {
        test: test.into(),
        decision,
        steps,
        eta: eta.value(),
        threshold_mode: spec.mode_name().into(),
        n_x: n,
        n_y: n,
        seed,
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

fn bootstrap_seed(spec: &ThresholdSpec) -> Option<u64> {
    match spec {
        ThresholdSpec::Bootstrap { seed, .. } => Some(*seed),
        ThresholdSpec::Analytic { .. } => None,
    }
}

fn mass_gap(charts: usize, px: &[Placement], py: &[Placement]) -> Result<f64> {
    l2_divergence(
        &masses_from_placements(charts, px),
        &masses_from_placements(charts, py),
    )
}

fn pick(pool: &[Placement], idx: &[usize]) -> Vec<Placement> {
    idx.iter().map(|&i| pool[i].clone()).collect()
}

/// The two-step atlas test.
///
/// Step I compares chart masses `‖p̂ − q̂‖₂` with its threshold at level
/// `η/2`. Only if it does not reject, step II compares the projected
/// statistic `T` with its threshold at `η/2`. Both statistics are always
/// reported. Charts populated on one side only are skipped in `T`.
///
/// Analytic mode reads the step II constants `c1`, `c2` from `spec`.
/// Bootstrap mode calibrates step I and step II on independent streams
/// derived from the spec seed (indices 0 and 1).
pub fn two_step_test(
    atlas: &Atlas,
    x: &Sample,
    y: &Sample,
    eta: TestLevel,
    spec: &ThresholdSpec,
) -> Result<TestReport> {
    let start = Instant::now();
    spec.validate()?;
    let n = equal_sizes(x, y)?;
    let charts = atlas.len();
    let px = atlas.place_all(x)?;
    let py = atlas.place_all(y)?;
    let stat1 = mass_gap(charts, &px, &py)?;
    let stat2 = projected_t_from_placements(charts, &px, &py, true)?.value;
    let sub = eta.half();

    let (thr1, degenerate1) = match spec {
        ThresholdSpec::Analytic { .. } => (threshold_step1(n, sub.value())?, false),
        ThresholdSpec::Bootstrap { replicates, seed } => {
            let pool: Vec<Placement> = px.iter().chain(&py).cloned().collect();
            let b = bootstrap_indexed(
                n,
                n,
                sub.value(),
                *replicates,
                derive_seed(*seed, 0),
                all_identical(&x.points, &y.points),
                |ix, iy| mass_gap(charts, &pick(&pool, ix), &pick(&pool, iy)),
            )?;
            (b.threshold, b.degenerate)
        }
    };
    let step1 = StepReport::decide("mass-l2", stat1, thr1, sub.value(), degenerate1);
    let step2 = if step1.status == StepStatus::Reject {
        StepReport::skipped("projected-w1", stat2, sub.value())
    } else {
        let (thr2, degenerate2) = match spec {
            ThresholdSpec::Analytic { .. } => (
                threshold_step2(
                    n,
                    sub.value(),
                    spec.constant("c1"),
                    spec.constant("c2"),
                    atlas.intrinsic_dim(),
                )?,
                false,
            ),
            ThresholdSpec::Bootstrap { replicates, seed } => {
                let pool: Vec<Placement> = px.iter().chain(&py).cloned().collect();
                let b = bootstrap_indexed(
                    n,
                    n,
                    sub.value(),
                    *replicates,
                    derive_seed(*seed, 1),
                    all_identical(&x.points, &y.points),
                    |ix, iy| {
                        Ok(projected_t_from_placements(
                            charts,
                            &pick(&pool, ix),
                            &pick(&pool, iy),
                            true,
                        )?
                        .value)
                    },
                )?;
                (b.threshold, b.degenerate)
            }
        };
        StepReport::decide("projected-w1", stat2, thr2, sub.value(), degenerate2)
    };
    Ok(finish(
        "two-step",
        vec![step1, step2],
        eta,
        spec,
        n,
        bootstrap_seed(spec),
        start,
    ))
}

/// Options of the critic test, also used as the Hölder-test surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnOptions {
    /// Fixed class; sized from `(n, D, d, s, β)` when absent.
    pub arch: Option<CriticArchitecture>,
    pub d: usize,
    pub s: u32,
    pub beta: f64,
    pub sizing: SizingConstants,
    pub train: TrainConfig,
    /// Constant of the analytic threshold.
    pub c1: f64,
}

impl Default for NnOptions {
    fn default() -> Self {
        Self {
            arch: None,
            d: 1,
            s: 1,
            beta: 1.0,
            sizing: SizingConstants::default(),
            train: TrainConfig::default(),
            c1: 1.0,
        }
    }
}

impl NnOptions {
    pub fn architecture(&self, n: usize, ambient_dim: usize) -> Result<CriticArchitecture> {
        match self.arch {
            Some(a) => {
                a.validate()?;
                if a.input_dim != ambient_dim {
                    return Err(Error::DimensionMismatch {
                        expected: a.input_dim,
                        got: ambient_dim,
                    });
                }
                Ok(a)
            }
            None => {
                hyperparams_from_theory(n, ambient_dim, self.d, self.s, self.beta, &self.sizing)
            }
        }
    }
}

fn trained_statistic(
    arch: &CriticArchitecture,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<f64> {
    Ok(train_critic_points(arch, xs, ys, cfg)?.statistic)
}

/// The critic IPM test. The statistic is the trained critic objective; each
/// bootstrap replicate retrains with the same configuration.
pub fn nn_test(
    x: &Sample,
    y: &Sample,
    eta: TestLevel,
    opts: &NnOptions,
    spec: &ThresholdSpec,
) -> Result<TestReport> {
    let start = Instant::now();
    spec.validate()?;
    let n = equal_sizes(x, y)?;
    let arch = opts.architecture(n, x.points[0].len())?;
    let stat = trained_statistic(&arch, &x.points, &y.points, &opts.train)?;
    let (thr, degenerate) = match spec {
        ThresholdSpec::Analytic { .. } => (
            nn_threshold(n, eta.value(), opts.s, opts.beta, opts.d, opts.c1)?,
            false,
        ),
        ThresholdSpec::Bootstrap { replicates, seed } => {
            let pool: Vec<&Vec<f64>> = x.points.iter().chain(&y.points).collect();
            let b = bootstrap_indexed(
                n,
                n,
                eta.value(),
                *replicates,
                *seed,
                all_identical(&x.points, &y.points),
                |ix, iy| {
                    let xs: Vec<Vec<f64>> = ix.iter().map(|&i| pool[i].clone()).collect();
                    let ys: Vec<Vec<f64>> = iy.iter().map(|&i| pool[i].clone()).collect();
                    trained_statistic(&arch, &xs, &ys, &opts.train)
                },
            )?;
            (b.threshold, b.degenerate)
        }
    };
    let step = StepReport::decide("nn-ipm", stat, thr, eta.value(), degenerate);
    let seed = bootstrap_seed(spec).or(Some(opts.train.seed));
    Ok(finish("nn", vec![step], eta, spec, n, seed, start))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HolderOptions {
    pub s: u32,
    pub beta: f64,
    /// Constant of the analytic threshold.
    pub c1: f64,
    /// Exact grid oracle on the angle chart; otherwise the critic surrogate.
    pub use_oracle: bool,
    pub segments: usize,
    pub quantum: f64,
    pub surrogate: NnOptions,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self {
            s: 1,
            beta: 1.0,
            c1: 1.0,
            use_oracle: true,
            segments: 32,
            quantum: 1.0 / 64.0,
            surrogate: NnOptions::default(),
        }
    }
}

/// The grid family on the angle chart `[−π, π]` of the circle.
pub fn angle_chart_family(opts: &HolderOptions) -> Result<GridFunctionFamily> {
    GridFunctionFamily::with_grid(opts.s, opts.beta, -PI, PI, opts.segments, opts.quantum)
}

/// Angle coordinates of circle sample points.
pub fn angle_coordinates(atlas: &Atlas, sample: &Sample) -> Result<Vec<f64>> {
    if atlas.embedding().shape() != Shape::Circle {
        return Err(Error::Scope(
            "the Hölder oracle needs a one-dimensional (circle) manifold".into(),
        ));
    }
    sample
        .points
        .iter()
        .map(|p| atlas.embedding().angle(p))
        .collect()
}

/// The Hölder IPM test with threshold `c1·n^{−(s+β)/d} + sqrt(4 ln(2/η))/√n`
/// or a bootstrap threshold of the same statistic.
///
/// With `use_oracle` the statistic is the exact grid oracle on the angle
/// chart of the circle; otherwise it is the trained critic surrogate.
pub fn holder_test(
    atlas: &Atlas,
    x: &Sample,
    y: &Sample,
    eta: TestLevel,
    opts: &HolderOptions,
    spec: &ThresholdSpec,
) -> Result<TestReport> {
    let start = Instant::now();
    spec.validate()?;
    let n = equal_sizes(x, y)?;
    let d = atlas.intrinsic_dim();
    let degenerate_pool = all_identical(&x.points, &y.points);
    let (stat, thr, degenerate) = if opts.use_oracle {
        let family = angle_chart_family(opts)?;
        let ax = angle_coordinates(atlas, x)?;
        let ay = angle_coordinates(atlas, y)?;
        let stat = oracle_ipm_points(&family, &ax, &ay)?.value;
        let (thr, degenerate) = match spec {
            ThresholdSpec::Analytic { .. } => (
                holder_threshold(n, eta.value(), opts.s, opts.beta, d, opts.c1)?,
                false,
            ),
            ThresholdSpec::Bootstrap { replicates, seed } => {
                let pool: Vec<f64> = ax.iter().chain(&ay).copied().collect();
                let mut bx = vec![0.0; n];
                let mut by = vec![0.0; n];
                let b = bootstrap_indexed(
                    n,
                    n,
                    eta.value(),
                    *replicates,
                    *seed,
                    degenerate_pool,
                    |ix, iy| {
                        for (dst, &i) in bx.iter_mut().zip(ix) {
                            *dst = pool[i];
                        }
                        for (dst, &i) in by.iter_mut().zip(iy) {
                            *dst = pool[i];
                        }
                        Ok(oracle_ipm_points(&family, &bx, &by)?.value)
                    },
                )?;
                (b.threshold, b.degenerate)
            }
        };
        (stat, thr, degenerate)
    } else {
        let surrogate = nn_test(x, y, eta, &opts.surrogate, spec)?;
        let step = &surrogate.steps[0];
        let thr = match spec {
            ThresholdSpec::Analytic { .. } => {
                holder_threshold(n, eta.value(), opts.s, opts.beta, d, opts.c1)?
            }
            ThresholdSpec::Bootstrap { .. } => step.threshold.expect("evaluated"),
        };
        (step.statistic, thr, step.degenerate)
    };
    let name = if opts.use_oracle {
        "holder-oracle"
    } else {
        "holder-surrogate"
    };
    let step = StepReport::decide(name, stat, thr, eta.value(), degenerate);
    Ok(finish(
        "holder",
        vec![step],
        eta,
        spec,
        n,
        bootstrap_seed(spec),
        start,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Embedding, ManifoldDescriptor};

    fn flat_circle() -> Atlas {
        let d = ManifoldDescriptor::new(Shape::Circle, 2, 0).unwrap();
        Atlas::with_embedding(Embedding::unrotated(Shape::Circle, 2).unwrap(), d)
    }

    fn at(angles: &[f64]) -> Sample {
        Sample::new(angles.iter().map(|t| vec![t.cos(), t.sin()]).collect(), 0)
    }

    fn level(eta: f64) -> TestLevel {
        TestLevel::new(eta).unwrap()
    }

    #[test]
    fn opposite_charts_reject_at_step_one() {
        let x = at(&[0.0; 50]);
        let y = at(&[PI; 50]);
        let r = two_step_test(
            &flat_circle(),
            &x,
            &y,
            level(0.1),
            &ThresholdSpec::analytic(),
        )
        .unwrap();
        assert_eq!(r.decision, Decision::Reject);
        assert!((r.steps[0].statistic - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.steps[0].threshold.unwrap() - 0.689_549_366_136_163_4).abs() < 1e-12);
        assert_eq!(r.steps[1].status, StepStatus::Skipped);
        assert_eq!(r.steps[1].threshold, None);
    }

    #[test]
    fn identical_samples_do_not_reject() {
        let x = at(&[0.1, 0.5, 2.0, -1.0, 3.0, -2.5]);
        for spec in [
            ThresholdSpec::analytic(),
            ThresholdSpec::bootstrap(60, 4).unwrap(),
        ] {
            let r = two_step_test(&flat_circle(), &x, &x, level(0.05), &spec).unwrap();
            assert_eq!(r.decision, Decision::NotReject);
            assert_eq!((r.steps[0].statistic, r.steps[1].statistic), (0.0, 0.0));
            let h = holder_test(
                &flat_circle(),
                &x,
                &x,
                level(0.05),
                &HolderOptions::default(),
                &spec,
            )
            .unwrap();
            assert_eq!(h.decision, Decision::NotReject);
        }
    }

    #[test]
    fn sizes_must_match() {
        let r = two_step_test(
            &flat_circle(),
            &at(&[0.0]),
            &at(&[0.0, 1.0]),
            level(0.05),
            &ThresholdSpec::analytic(),
        );
        assert!(matches!(r, Err(Error::SizeMismatch(1, 2))));
    }

    #[test]
    fn oracle_point_masses_feed_the_decision() {
        // Angles 0 and 1. On [−π, π] the steepest grid slope is 12·(1/64)/(2π/32) ≈ 0.955.
        let x = at(&[0.0]);
        let y = at(&[1.0]);
        let r = holder_test(
            &flat_circle(),
            &x,
            &y,
            level(0.05),
            &HolderOptions::default(),
            &ThresholdSpec::analytic(),
        )
        .unwrap();
        let step = &r.steps[0];
        let direct = oracle_ipm_points(
            &angle_chart_family(&HolderOptions::default()).unwrap(),
            &[0.0],
            &[1.0],
        )
        .unwrap();
        assert_eq!(step.statistic, direct.value);
        assert!(
            step.statistic > 0.95 && step.statistic <= 1.0,
            "{}",
            step.statistic
        );
        let expected = holder_threshold(1, 0.05, 1, 1.0, 1, 1.0).unwrap();
        assert_eq!(step.threshold, Some(expected));
        assert_eq!(r.decision.rejects(), step.statistic >= expected);
    }

    #[test]
    fn report_json_has_stable_fields() {
        let x = at(&[0.0, 0.3]);
        let r = two_step_test(
            &flat_circle(),
            &x,
            &x,
            level(0.05),
            &ThresholdSpec::analytic(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in [
            "test",
            "decision",
            "steps",
            "eta",
            "threshold_mode",
            "n_x",
            "n_y",
            "seed",
            "wall_time_secs",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["steps"][0]["status"], "not-reject");
    }
}
