//! Monte Carlo risk estimation, power curves and the config-driven runner.

mod config;
mod risk;
mod run;

pub use config::{ConfigFile, Scenario, TestKind};
pub use risk::{
    clopper_pearson, estimate_risks, estimate_risks_at, power_curve, summarize, trial_outcomes,
    trial_seed, write_csv, PowerRow, RiskEstimate, TrialOutcome, CSV_HEADER,
};
pub use run::{
    exit_code, ot_selftest, run_config, Command, Overrides, SelftestSummary, OUT_DIR_ENV,
};
