//! End-to-end checks of the command-line interface: exit codes, config
//! handling, and byte-stable outputs.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slabsolve"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("slabsolve-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn verify_passes_on_fresh_checkout() {
    let dir = scratch("verify");
    let status = bin()
        .arg("verify")
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.join("out/verify.json").exists());
}

#[test]
fn records_are_byte_stable() {
    let dir = scratch("stable");
    for sub in ["a", "b"] {
        let status = bin()
            .arg("bratu-threshold")
            .arg("--out")
            .arg(dir.join(sub))
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(dir.join("a/bratu-threshold.json")).unwrap();
    let b = fs::read(dir.join("b/bratu-threshold.json")).unwrap();
    assert_eq!(a, b, "result records must be byte-identical");
    let a = fs::read(dir.join("a/bratu-threshold_curve.dat")).unwrap();
    let b = fs::read(dir.join("b/bratu-threshold_curve.dat")).unwrap();
    assert_eq!(a, b, "plot data must be byte-identical");
}

#[test]
fn hypothesis_refusal_uses_its_own_exit_code() {
    let dir = scratch("refusal");
    let config = dir.join("beyond.conf");
    fs::write(
        &config,
        "experiment = bratu-solve\nlambda = 1.5\nresolution = 100\n",
    )
    .unwrap();
    let status = bin()
        .arg("bratu-solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // --force runs it anyway; lambda = 1.5 still sits below the true
    // critical parameter 2 on the disk, so the run itself succeeds
    let status = bin()
        .arg("bratu-solve")
        .arg("--config")
        .arg(&config)
        .arg("--force")
        .arg("--out")
        .arg(dir.join("out_forced"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn config_errors_exit_one() {
    let dir = scratch("config");
    let config = dir.join("bad.conf");
    fs::write(&config, "experiment = bratu-solve\nbogus = 1\n").unwrap();
    let status = bin()
        .arg("bratu-solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    let status = bin()
        .arg("no-such-experiment")
        .arg("--out")
        .arg(dir.join("out2"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // experiment name in the config must match the positional argument
    let mismatched = dir.join("mismatch.conf");
    fs::write(&mismatched, "experiment = staircase\n").unwrap();
    let status = bin()
        .arg("bratu-solve")
        .arg("--config")
        .arg(&mismatched)
        .arg("--out")
        .arg(dir.join("out3"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn record_echoes_config_and_carries_provenance() {
    let dir = scratch("echo");
    let config = dir.join("run.conf");
    fs::write(
        &config,
        "experiment = bratu-solve\nlambda = 0.9\nresolution = 150\n",
    )
    .unwrap();
    let status = bin()
        .arg("bratu-solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/bratu-solve.json")).unwrap())
            .unwrap();
    assert_eq!(record["inputs"]["lambda"], "0.9");
    assert_eq!(record["values"]["sup_norm"]["provenance"], "run");
    assert_eq!(record["values"]["lambda_star"]["provenance"], "formula");
    assert_eq!(record["pass"], true);

    // plot files carry the config hash of the run that made them
    let dat = fs::read_to_string(dir.join("out/bratu-solve_profile.dat")).unwrap();
    let hash = record["config_hash"].as_str().unwrap();
    assert!(dat.starts_with(&format!("# config {hash}")));
}

#[test]
fn worker_env_var_is_honored() {
    let dir = scratch("workers");
    let config = dir.join("run.conf");
    fs::write(
        &config,
        "experiment = sublinear-scaling\ndims = 2,3,4,5\nresolution = 100\n",
    )
    .unwrap();
    let mut single = bin();
    single
        .arg("sublinear-scaling")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("one"))
        .env("SLABSOLVE_WORKERS", "1");
    assert!(single.status().unwrap().success());
    let mut multi = bin();
    multi
        .arg("sublinear-scaling")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("four"))
        .env("SLABSOLVE_WORKERS", "4");
    assert!(multi.status().unwrap().success());
    // worker count must not change the numbers
    let a = fs::read(dir.join("one/sublinear-scaling.json")).unwrap();
    let b = fs::read(dir.join("four/sublinear-scaling.json")).unwrap();
    assert_eq!(a, b);
}
