use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Reject,
    NotReject,
}

impl Decision {
    pub fn rejects(self) -> bool {
        self == Decision::Reject
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepStatus {
    Reject,
    NotReject,
    Skipped,
}

/// One statistic-versus-threshold comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub name: String,
    pub statistic: f64,
    /// Absent when the step was skipped.
    pub threshold: Option<f64>,
    pub eta: f64,
    pub status: StepStatus,
    /// The bootstrap pool was a single repeated point.
    pub degenerate: bool,
}

impl StepReport {
    /// Rejects iff `statistic ≥ threshold`, unless the threshold is degenerate.
    pub(crate) fn decide(
        name: &str,
        statistic: f64,
        threshold: f64,
        eta: f64,
        degenerate: bool,
    ) -> Self {
        let status = if !degenerate && statistic >= threshold {
            StepStatus::Reject
        } else {
            StepStatus::NotReject
        };
        Self {
            name: name.into(),
            statistic,
            threshold: Some(threshold),
            eta,
            status,
            degenerate,
        }
    }

    pub(crate) fn skipped(name: &str, statistic: f64, eta: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold: None,
            eta,
            status: StepStatus::Skipped,
            degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub decision: Decision,
    pub steps: Vec<StepReport>,
    pub eta: f64,
    pub threshold_mode: String,
    pub n_x: usize,
    pub n_y: usize,
    pub seed: Option<u64>,
    pub wall_time_secs: f64,
}

impl TestReport {
    /// The statistic of the last evaluated step (the one that decided).
    pub fn deciding_step(&self) -> &StepReport {
        self.steps
            .iter()
            .rev()
            .find(|s| s.status != StepStatus::Skipped)
            .expect("at least one step is evaluated")
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}
