use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use super::config::{Scenario, TestKind};
use crate::error::{Error, Result};
use crate::manifold::{sample_with_embedding, Atlas, DistributionSpec};
use crate::rng::derive_seed;
use crate::testkit::{holder_test, nn_test, two_step_test, StepStatus, TestReport, ThresholdSpec};

pub const CSV_HEADER: &str =
    "scenario,test,n,eta,trials,rejections,rate,ci_lo,ci_hi,mean_stat,mean_threshold,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub rejections: usize,
    pub trials: usize,
    pub rejection_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_statistic: f64,
    pub mean_threshold: f64,
}

/// Exact two-sided Clopper–Pearson interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: usize, n: usize, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bad binomial interval input k={k}, n={n}"
        )));
    }
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::InvalidArgument(e.to_string()));
    let lo = if k == 0 {
        0.0
    } else {
        beta(kf, nf - kf + 1.0)?.inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        beta(kf + 1.0, nf - kf)?.inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((lo, hi))
}

/// Outcome of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub reject: bool,
    pub statistic: f64,
    pub threshold: f64,
}

/// Seed of trial `index`; samples, bootstrap and training draw from streams
/// 0, 1, 2 and 3 derived from it.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, index as u64)
}

pub(crate) struct Prepared {
    atlas: Atlas,
    p: DistributionSpec,
    q: DistributionSpec,
}

impl Prepared {
    pub(crate) fn new(s: &Scenario) -> Result<Self> {
        let (p, q) = s.specs()?;
        Ok(Self {
            atlas: s.atlas()?,
            p,
            q,
        })
    }
}

pub(crate) fn run_trial(
    s: &Scenario,
    prep: &Prepared,
    n: usize,
    index: usize,
) -> Result<TestReport> {
    let seed = trial_seed(s.seed, index);
    let x = sample_with_embedding(&prep.p, prep.atlas.embedding(), n, derive_seed(seed, 0))?;
    let y = sample_with_embedding(&prep.q, prep.atlas.embedding(), n, derive_seed(seed, 1))?;
    let spec = match (&s.threshold, s.force_threshold) {
        (_, Some(_)) => ThresholdSpec::analytic(),
        (ThresholdSpec::Bootstrap { replicates, .. }, None) => ThresholdSpec::Bootstrap {
            replicates: *replicates,
            seed: derive_seed(seed, 2),
        },
        (analytic, None) => analytic.clone(),
    };
    let eta = s.level()?;
    let mut nn = s.nn.clone();
    nn.train.seed = derive_seed(seed, 3);
    match s.test {
        TestKind::TwoStep => two_step_test(&prep.atlas, &x, &y, eta, &spec),
        TestKind::Holder => {
            let mut h = s.holder.clone();
            h.surrogate.train.seed = nn.train.seed;
            holder_test(&prep.atlas, &x, &y, eta, &h, &spec)
        }
        TestKind::Nn => nn_test(&x, &y, eta, &nn, &spec),
    }
}

fn outcome(s: &Scenario, report: &TestReport) -> TrialOutcome {
    match s.force_threshold {
        Some(t) => {
            let stats = report.steps.iter().map(|st| st.statistic);
            let reject = stats.clone().any(|v| v >= t);
            let statistic = if reject {
                report
                    .steps
                    .iter()
                    .map(|st| st.statistic)
                    .find(|v| *v >= t)
                    .unwrap_or(0.0)
            } else {
                report.steps.last().map_or(0.0, |st| st.statistic)
            };
            TrialOutcome {
                reject,
                statistic,
                threshold: t,
            }
        }
        None => {
            let step = report.deciding_step();
            TrialOutcome {
                reject: step.status == StepStatus::Reject,
                statistic: step.statistic,
                threshold: step.threshold.unwrap_or(f64::NAN),
            }
        }
    }
}

/// Runs `trials` independent executions of the scenario at size `n` in the
/// current rayon pool; results are combined in trial order.
pub fn trial_outcomes(s: &Scenario, n: usize) -> Result<Vec<TrialOutcome>> {
    let prep = Prepared::new(s)?;
    (0..s.trials)
        .into_par_iter()
        .map(|i| run_trial(s, &prep, n, i).map(|r| outcome(s, &r)))
        .collect()
}

pub fn summarize(outcomes: &[TrialOutcome]) -> Result<RiskEstimate> {
    let trials = outcomes.len();
    let rejections = outcomes.iter().filter(|o| o.reject).count();
    let (ci_lo, ci_hi) = clopper_pearson(rejections, trials, 0.95)?;
    let mean = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / trials as f64;
    Ok(RiskEstimate {
        rejections,
        trials,
        rejection_rate: rejections as f64 / trials as f64,
        ci_lo,
        ci_hi,
        mean_statistic: mean(|o| o.statistic),
        mean_threshold: mean(|o| o.threshold),
    })
}

/// Monte Carlo rejection rate of the scenario at its own `n`.
pub fn estimate_risks(s: &Scenario) -> Result<RiskEstimate> {
    estimate_risks_at(s, s.n)
}

pub fn estimate_risks_at(s: &Scenario, n: usize) -> Result<RiskEstimate> {
    s.validate("scenario")?;
    summarize(&trial_outcomes(s, n)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub scenario: String,
    pub test: String,
    pub n: usize,
    pub eta: f64,
    pub seed: u64,
    pub estimate: RiskEstimate,
}

/// One rejection-rate estimate per sample size. Under an alternative the
/// type-II risk is `1 − rate`.
pub fn power_curve(base: &Scenario, n_grid: &[usize]) -> Result<Vec<PowerRow>> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(
            "n_grid",
            "must be nonempty and strictly increasing",
        ));
    }
    n_grid
        .iter()
        .map(|&n| {
            Ok(PowerRow {
                scenario: base.name.clone(),
                test: base.test.name().into(),
                n,
                eta: base.eta,
                seed: base.seed,
                estimate: estimate_risks_at(base, n)?,
            })
        })
        .collect()
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the fixed header and one line per row.
pub fn write_csv<W: Write>(mut w: W, rows: &[PowerRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let e = &r.estimate;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.test,
            r.n,
            num(r.eta),
            e.trials,
            e.rejections,
            num(e.rejection_rate),
            num(e.ci_lo),
            num(e.ci_hi),
            num(e.mean_statistic),
            num(e.mean_threshold),
            r.seed
        )?;
    }
    Ok(())
}
