//! Drives the `grid-robustness` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grid-robustness"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn small_run(dir: &Path, perturber: &str) -> Output {
    run(&[
        "run",
        "--perturber",
        perturber,
        "--episodes",
        "2",
        "--max-steps",
        "300",
        "--seed",
        "3",
        "--p",
        "0.5",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn run_writes_reports_series_and_weakmap() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), "rpa");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["campaign.json", "robustness.json", "resilience.json", "episode_metrics.json", "robustness.txt"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let weak = std::fs::read_to_string(dir.path().join("weakmap.csv")).unwrap();
    let mut lines = weak.lines();
    assert_eq!(lines.next(), Some("index,element,group,score"));
    assert_eq!(lines.count(), 36);
    let reward = std::fs::read_to_string(dir.path().join("series/reward_000.csv")).unwrap();
    assert_eq!(reward.lines().next(), Some("step,R_u,R_p,delta"));
    assert_eq!(reward.lines().count(), 301);
    let cosine = std::fs::read_to_string(dir.path().join("series/cosine_001.csv")).unwrap();
    assert_eq!(cosine.lines().next(), Some("step,cosine"));
}

#[test]
fn report_recomputes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path(), "rpa")), 0);
    let again = tempfile::tempdir().unwrap();
    let out = run(&["report", "--from", dir.path().to_str().unwrap(), "--out", again.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["robustness.json", "resilience.json", "episode_metrics.json", "weakmap.csv", "series/reward_001.csv"] {
        assert_eq!(std::fs::read_to_string(dir.path().join(f)).unwrap(), std::fs::read_to_string(again.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn weakmap_subcommand_lists_every_sensor() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path(), "rpa")), 0);
    let out = run(&["weakmap", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 37);
}

#[test]
fn train_rlpa_saves_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["train-rlpa", "--max-steps", "200", "--seed", "2", "--out", d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let model = dir.path().join("rlpa_q.json");
    assert!(model.is_file());

    let cfg = dir.path().join("eval.toml");
    std::fs::write(&cfg, "episodes = 1\nmax_steps = 100\n[perturber]\nkind = \"rlpa\"\nrlpa_model = \"rlpa_q.json\"\n")
        .unwrap();
    let eval = dir.path().join("eval");
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--out", eval.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!eval.join("rlpa_q.json").exists(), "a loaded model is not re-saved");
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["run", "--perturber", "nonsense", "--out", d])), 1);
    assert_eq!(code(&run(&["run", "--perturber", "rpa", "--p", "1.5", "--out", d])), 1);
    assert_eq!(code(&run(&["run", "--episodes", "0", "--out", d])), 1);
    assert_eq!(code(&run(&["run", "--config", "/nonexistent/campaign.toml", "--out", d])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "episodes = 2\nbogus_key = 1\n").unwrap();
    assert_eq!(code(&run(&["run", "--config", cfg.to_str().unwrap(), "--out", d])), 1);
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["report", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("campaign.json"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["run", "--help"])), 0);
}
