use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use manitest::harness::{exit_code, ot_selftest, run_config, Command, Overrides, OUT_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "manitest",
    version,
    about = "Manifold two-sample tests: Monte Carlo harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Master seed for every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per estimate.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate rejection rates of every scenario at its n.
    Run(Common),
    /// Rejection rate over each scenario's n_grid.
    PowerCurve(Common),
    /// Type-I rates with q replaced by p.
    Calibrate(Common),
    /// Check the exact transport solver against the assignment oracle.
    OtSelftest {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Run(c) => (Command::Run, c),
        Cmd::PowerCurve(c) => (Command::PowerCurve, c),
        Cmd::Calibrate(c) => (Command::Calibrate, c),
        Cmd::OtSelftest { instances, seed } => {
            return match ot_selftest(instances, seed, 1e-9) {
                Ok(s) => {
                    println!(
                        "ot-selftest: {} instances, {} failures, max |diff| = {:.3e}",
                        s.instances, s.failures, s.max_abs_diff
                    );
                    ExitCode::from(if s.failures == 0 { 0 } else { 3 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            };
        }
    };
    let overrides = Overrides {
        out: common.out,
        seed: common.seed,
        trials: common.trials,
        threads: common.threads,
    };
    let result = run_config(command, &common.config, &overrides);
    match &result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
