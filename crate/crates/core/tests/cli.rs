use std::fs;
use std::path::Path;
use std::process::Command;

use manitest::harness::{estimate_risks, trial_seed, ConfigFile, CSV_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_manitest");

const NULL_CONFIG: &str = r#"
[[scenario]]
name = "null"
manifold = "circle"
ambient_dim = 3
p = { family = "uniform-circle" }
test = "two-step"
n = 20
trials = 6
null_calibration = true
threshold = { mode = "bootstrap", replicates = 50 }
"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn manitest(args: &[&str]) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .env_remove("MANITEST_OUT")
        .output()
        .unwrap()
}

#[test]
fn minimal_null_config_writes_the_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "null.toml", NULL_CONFIG);
    let out = dir.path().join("out");
    let o = manitest(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,test,n,eta,trials,rejections,rate,ci_lo,ci_hi,mean_stat,mean_threshold,seed"
    );
    assert_eq!(CSV_HEADER, csv.lines().next().unwrap());
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], &["null", "two-step", "20"]);
    assert!(lines.next().is_none());
    assert!(out.join("results.json").exists());
}

#[test]
fn seed_override_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "null.toml", NULL_CONFIG);
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = manitest(&[
            "run",
            cfg.to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ]);
        assert_eq!(o.status.code(), Some(0));
        (
            fs::read(out.join("results.csv")).unwrap(),
            fs::read(out.join("results.json")).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
    let other = dir.path().join("c");
    manitest(&[
        "run",
        cfg.to_str().unwrap(),
        "--seed",
        "8",
        "--out",
        other.to_str().unwrap(),
    ]);
    assert_ne!(fs::read(other.join("results.csv")).unwrap(), run("d").0);
}

#[test]
fn unknown_test_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        &NULL_CONFIG.replace("\"two-step\"", "\"three-step\""),
    );
    let o = manitest(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("test"), "{err}");
}

#[test]
fn config_errors_exit_2_runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = manitest(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    // output path occupied by a regular file
    let blocker = write(dir.path(), "blocker", "");
    let cfg = write(
        dir.path(),
        "ok.toml",
        &NULL_CONFIG.replace("trials = 6", "trials = 1"),
    );
    let o = manitest(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let cfg = write(
        dir.path(),
        "zero.toml",
        &NULL_CONFIG.replace("trials = 6", "trials = 0"),
    );
    let o = manitest(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(
        dir.path(),
        "typo.toml",
        &NULL_CONFIG.replace("trials = 6", "trails = 6"),
    );
    let o = manitest(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trails"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "null.toml", NULL_CONFIG);
    let out = dir.path().join("from-env");
    let o = Command::new(BIN)
        .args(["calibrate", cfg.to_str().unwrap(), "--trials", "2"])
        .env("MANITEST_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("calibration.csv").exists());
}

#[test]
fn power_curve_emits_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[[scenario]]
name = "alt"
manifold = "circle"
ambient_dim = 2
p = { family = "uniform-circle" }
q = { family = "von-mises-circle", kappa = 2.0, mu = 1.5707963267948966 }
test = "two-step"
n = 20
n_grid = [10, 20]
trials = 3
threshold = { mode = "analytic", constants = {} }
"#;
    let cfg = write(dir.path(), "alt.toml", text);
    let out = dir.path().join("pc");
    let o = manitest(&[
        "power-curve",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(out.join("power_curve.csv")).unwrap();
    let ns: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(ns, ["10", "20"]);
}

#[test]
fn ot_selftest_passes() {
    let o = manitest(&["ot-selftest", "--instances", "200", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 failures"));
}

#[test]
fn forced_thresholds_pin_the_rate() {
    let base = NULL_CONFIG.replace("null_calibration = true\n", "");
    let never = ConfigFile::parse(&format!("{base}force_threshold = inf\n")).unwrap();
    let e = estimate_risks(&never.scenario[0]).unwrap();
    assert_eq!(e.rejections, 0);
    assert_eq!(e.ci_lo, 0.0);
    // the projected statistic of two independent continuous samples is a.s. positive
    let always = ConfigFile::parse(&format!("{base}force_threshold = 0.0\n")).unwrap();
    let e = estimate_risks(&always.scenario[0]).unwrap();
    assert_eq!(e.rejection_rate, 1.0);
    assert_eq!(e.ci_hi, 1.0);
}

#[test]
fn trial_seeds_are_distinct() {
    let mut seeds: Vec<u64> = (0..100_000).map(|t| trial_seed(42, t)).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 100_000);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ConfigFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 3);
}
