use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of bootstrap replicates.
pub const MIN_REPLICATES: usize = 50;

/// A significance level `η ∈ (0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TestLevel(f64);

impl TestLevel {
    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 && eta < 0.5 {
            Ok(Self(eta))
        } else {
            Err(Error::Level(eta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn half(self) -> Self {
        Self(self.0 / 2.0)
    }
}

impl TryFrom<f64> for TestLevel {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TestLevel> for f64 {
    fn from(l: TestLevel) -> f64 {
        l.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ThresholdSpec {
    /// Closed-form thresholds; missing constants default to 1.
    Analytic {
        #[serde(default)]
        constants: BTreeMap<String, f64>,
    },
    Bootstrap {
        replicates: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl ThresholdSpec {
    pub fn analytic() -> Self {
        ThresholdSpec::Analytic {
            constants: BTreeMap::new(),
        }
    }

    pub fn bootstrap(replicates: usize, seed: u64) -> Result<Self> {
        let s = ThresholdSpec::Bootstrap { replicates, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdSpec::Bootstrap { replicates, .. } if *replicates < MIN_REPLICATES => {
                Err(Error::InvalidArgument(format!(
                    "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
                )))
            }
            ThresholdSpec::Analytic { constants } => match constants
                .iter()
                .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
            {
                Some((k, v)) => Err(Error::InvalidArgument(format!(
                    "constant {k} must be positive, got {v}"
                ))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Analytic constant `name`, 1 when absent or in bootstrap mode.
    pub fn constant(&self, name: &str) -> f64 {
        match self {
            ThresholdSpec::Analytic { constants } => constants.get(name).copied().unwrap_or(1.0),
            ThresholdSpec::Bootstrap { .. } => 1.0,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            ThresholdSpec::Analytic { .. } => "analytic",
            ThresholdSpec::Bootstrap { .. } => "bootstrap",
        }
    }
}

fn positive_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    Ok(n as f64)
}

/// Step I threshold `sqrt(2/n)·(1 + sqrt(2·ln(1/η)))`.
pub fn threshold_step1(n: usize, eta: f64) -> Result<f64> {
    let eta = TestLevel::new(eta)?.value();
    let n = positive_n(n)?;
    Ok((2.0 / n).sqrt() * (1.0 + (2.0 * (1.0 / eta).ln()).sqrt()))
}

/// Step II threshold: `ln(c1/η)/(c2·n)` while `n < ln(c1/η)/c2`, otherwise
/// `(ln(c1/η)/(c2·n))^{1/max(d,3)}`.
pub fn threshold_step2(n: usize, eta: f64, c1: f64, c2: f64, d: usize) -> Result<f64> {
    let eta = TestLevel::new(eta)?.value();
    let nf = positive_n(n)?;
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "constants must be positive, got c1={c1}, c2={c2}"
        )));
    }
    let log_term = (c1 / eta).ln();
    let ratio = log_term / (c2 * nf);
    if nf < log_term / c2 {
        Ok(ratio)
    } else {
        Ok(ratio.max(0.0).powf(1.0 / d.max(3) as f64))
    }
}

fn concentration_term(n: f64, eta: f64) -> f64 {
    (4.0 * (2.0 / eta).ln()).sqrt() / n.sqrt()
}

fn check_smoothness(s: u32, beta: f64, d: usize) -> Result<()> {
    if s < 1 || !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Smoothness(format!(
            "need s ≥ 1 and β ∈ (0, 1], got s={s}, β={beta}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidDimension(
            "intrinsic dimension must be positive".into(),
        ));
    }
    Ok(())
}

/// Hölder IPM threshold `c1·n^{−(s+β)/d} + sqrt(4·ln(2/η))·n^{−1/2}`.
pub fn holder_threshold(n: usize, eta: f64, s: u32, beta: f64, d: usize, c1: f64) -> Result<f64> {
    let eta = TestLevel::new(eta)?.value();
    let nf = positive_n(n)?;
    check_smoothness(s, beta, d)?;
    Ok(c1 * nf.powf(-(s as f64 + beta) / d as f64) + concentration_term(nf, eta))
}

/// Critic IPM threshold
/// `c1·n^{−(s+β)/(2(s+β)+d)}·(ln n)² + sqrt(4·ln(2/η))·n^{−1/2}`.
pub fn nn_threshold(n: usize, eta: f64, s: u32, beta: f64, d: usize, c1: f64) -> Result<f64> {
    let eta = TestLevel::new(eta)?.value();
    let nf = positive_n(n)?;
    check_smoothness(s, beta, d)?;
    let a = s as f64 + beta;
    let ln = nf.ln();
    Ok(c1 * nf.powf(-a / (2.0 * a + d as f64)) * ln * ln + concentration_term(nf, eta))
}
