use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ConfigFile;
use super::risk::{power_curve, write_csv, PowerRow};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::transport::{assignment_oracle, wasserstein1, WeightedPointCloud};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MANITEST_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Each scenario at its own `n`.
    Run,
    /// Each scenario over its `n_grid`.
    PowerCurve,
    /// Each scenario with `q` replaced by `p`.
    Calibrate,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("manitest-out"))
    }
}

/// Exit status for a finished command: 0 ok, 2 config error, 3 otherwise.
pub fn exit_code<T>(result: &Result<T>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(Error::Config { .. }) => 2,
        Err(_) => 3,
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(f),
        None => f(),
    }
}

/// Loads the config, applies overrides, runs every scenario and writes a
/// CSV (and for `Run` a JSON copy) into the output directory. Returns the
/// written paths.
pub fn run_config(command: Command, path: &Path, overrides: &Overrides) -> Result<Vec<PathBuf>> {
    let mut cfg = ConfigFile::load(path)?;
    if overrides.threads == Some(0) {
        return Err(Error::config("--threads", "must be at least 1"));
    }
    if overrides.trials == Some(0) {
        return Err(Error::config("--trials", "must be at least 1"));
    }
    for (i, s) in cfg.scenario.iter_mut().enumerate() {
        if let Some(seed) = overrides.seed {
            s.seed = seed;
        }
        if let Some(t) = overrides.trials {
            s.trials = t;
        }
        if command == Command::Calibrate {
            s.q = None;
            s.null_calibration = true;
        }
        s.validate(&format!("scenario[{i}]"))?;
    }
    let rows: Vec<PowerRow> = in_pool(overrides.threads, || {
        let mut rows = Vec::new();
        for s in &cfg.scenario {
            let grid = match command {
                Command::PowerCurve => s.grid(),
                Command::Run | Command::Calibrate => vec![s.n],
            };
            rows.extend(power_curve(s, &grid)?);
        }
        Ok(rows)
    })?;

    let dir = overrides.out_dir();
    fs::create_dir_all(&dir)?;
    let stem = match command {
        Command::Run => "results",
        Command::PowerCurve => "power_curve",
        Command::Calibrate => "calibration",
    };
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows)?;
    fs::write(&csv_path, buf)?;
    let mut written = vec![csv_path];
    if command == Command::Run {
        let json_path = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&rows).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&json_path, text)?;
        written.push(json_path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestSummary {
    pub instances: usize,
    pub max_abs_diff: f64,
    pub failures: usize,
}

/// Compares the exact solver with the assignment oracle on random
/// equal-size uniform clouds (`n ≤ 7`, `d ≤ 3`).
pub fn ot_selftest(instances: usize, seed: u64, tolerance: f64) -> Result<SelftestSummary> {
    let mut max_abs_diff: f64 = 0.0;
    let mut failures = 0;
    for i in 0..instances {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let n = rng.random_range(1..=7);
        let d = rng.random_range(1..=3);
        let mut cloud = || -> Result<WeightedPointCloud> {
            WeightedPointCloud::uniform(
                (0..n)
                    .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
                    .collect(),
            )
        };
        let (x, y) = (cloud()?, cloud()?);
        let (w, _) = wasserstein1(&x, &y)?;
        let diff = (w - assignment_oracle(&x, &y)?).abs();
        max_abs_diff = max_abs_diff.max(diff);
        if diff > tolerance {
            failures += 1;
        }
    }
    Ok(SelftestSummary {
        instances,
        max_abs_diff,
        failures,
    })
}
