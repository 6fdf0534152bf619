use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Atlas, DistributionSpec, Family, ManifoldDescriptor, Shape};
use crate::testkit::{HolderOptions, NnOptions, TestLevel, ThresholdSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    TwoStep,
    Holder,
    Nn,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::TwoStep => "two-step",
            TestKind::Holder => "holder",
            TestKind::Nn => "nn",
        }
    }
}

fn default_threshold() -> ThresholdSpec {
    ThresholdSpec::Bootstrap {
        replicates: 200,
        seed: 0,
    }
}

fn default_trials() -> usize {
    100
}

fn default_eta() -> f64 {
    0.05
}

/// One experiment: a pair of distributions, a test, and Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub manifold: Shape,
    pub ambient_dim: usize,
    #[serde(default)]
    pub rotation_seed: u64,
    pub p: Family,
    /// Defaults to `p`.
    #[serde(default)]
    pub q: Option<Family>,
    pub test: TestKind,
    pub n: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_threshold")]
    pub threshold: ThresholdSpec,
    /// Replaces every computed threshold, e.g. `inf` or `0.0`.
    #[serde(default)]
    pub force_threshold: Option<f64>,
    #[serde(default)]
    pub holder: HolderOptions,
    #[serde(default)]
    pub nn: NnOptions,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Requires `q` to equal `p`.
    #[serde(default)]
    pub null_calibration: bool,
    /// Sample sizes for `power-curve`; defaults to `[n]`.
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Vec<Scenario>,
}

impl Scenario {
    pub fn q_family(&self) -> &Family {
        self.q.as_ref().unwrap_or(&self.p)
    }

    pub fn descriptor(&self) -> Result<ManifoldDescriptor> {
        ManifoldDescriptor::new(self.manifold, self.ambient_dim, self.rotation_seed)
    }

    pub fn atlas(&self) -> Result<Atlas> {
        Atlas::new(&self.descriptor()?)
    }

    pub fn specs(&self) -> Result<(DistributionSpec, DistributionSpec)> {
        let m = self.descriptor()?;
        Ok((
            DistributionSpec::new(self.p.clone(), m.clone())?,
            DistributionSpec::new(self.q_family().clone(), m)?,
        ))
    }

    pub fn level(&self) -> Result<TestLevel> {
        TestLevel::new(self.eta)
    }

    pub fn grid(&self) -> Vec<usize> {
        self.n_grid.clone().unwrap_or_else(|| vec![self.n])
    }

    /// Checks every field, reporting failures as config errors at `path`.
    pub fn validate(&self, path: &str) -> Result<()> {
        let at = |field: &str, e: Error| Error::config(format!("{path}.{field}"), e.to_string());
        if self.name.is_empty() || self.name.contains([',', '"', '\n']) {
            return Err(Error::config(
                format!("{path}.name"),
                "must be nonempty without commas or quotes",
            ));
        }
        self.descriptor().map_err(|e| at("ambient_dim", e))?;
        let m = self.descriptor()?;
        DistributionSpec::new(self.p.clone(), m.clone()).map_err(|e| at("p", e))?;
        DistributionSpec::new(self.q_family().clone(), m).map_err(|e| at("q", e))?;
        self.level().map_err(|e| at("eta", e))?;
        self.threshold.validate().map_err(|e| at("threshold", e))?;
        self.nn.train.validate().map_err(|e| at("nn.train", e))?;
        if self.trials == 0 {
            return Err(Error::config(
                format!("{path}.trials"),
                "must be at least 1",
            ));
        }
        if self.n == 0 {
            return Err(Error::config(format!("{path}.n"), "must be at least 1"));
        }
        if self.null_calibration && self.q_family() != &self.p {
            return Err(Error::config(
                format!("{path}.q"),
                "null calibration requires q = p",
            ));
        }
        if let Some(g) = &self.n_grid {
            if g.is_empty() || g.contains(&0) || g.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(
                    format!("{path}.n_grid"),
                    "must be nonempty, positive and strictly increasing",
                ));
            }
        }
        if let Some(t) = self.force_threshold {
            if t.is_nan() {
                return Err(Error::config(
                    format!("{path}.force_threshold"),
                    "must not be NaN",
                ));
            }
        }
        if self.test == TestKind::Holder && self.holder.use_oracle && self.manifold != Shape::Circle
        {
            return Err(Error::config(
                format!("{path}.holder.use_oracle"),
                "the oracle needs the circle",
            ));
        }
        Ok(())
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::config("<document>", e.to_string()))?;
        let cfg: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().message().to_string())
        })?;
        if cfg.scenario.is_empty() {
            return Err(Error::config(
                "scenario",
                "at least one scenario is required",
            ));
        }
        for (i, s) in cfg.scenario.iter().enumerate() {
            s.validate(&format!("scenario[{i}]"))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::parse(&text)
    }
}
