use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nhtrace::{ExperimentConfig, RecipeName};

fn nhtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhtrace")).args(args).output().expect("spawn nhtrace")
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL_PLANCHEREL: &str = r#"
recipe = "plancherel_suite"
seed = 7

[model]
id = "twisted_h"
h = 2.5
modes = 32

[plancherel]
functions = 12
"#;

#[test]
fn every_example_config_parses_and_names_its_recipe() {
    for recipe in RecipeName::ALL {
        let path = config_dir().join(format!("{recipe}.toml"));
        let config = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(config.recipe, recipe);
    }
}

#[test]
fn list_recipes_prints_every_name() {
    let out = nhtrace(&["list-recipes"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for recipe in RecipeName::ALL {
        assert!(text.contains(recipe.as_str()), "{recipe} missing from\n{text}");
    }
}

#[test]
fn passing_recipe_exits_zero_and_writes_its_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", SMALL_PLANCHEREL);
    let out_dir = dir.path().join("out");
    let out = nhtrace(&[
        "plancherel_suite",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--no-cache",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["plancherel.csv", "coefficients.csv", "report.json"] {
        assert!(out_dir.join(file).is_file(), "{file}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["recipe"], "plancherel_suite");
}

#[test]
fn invalid_config_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.toml", &SMALL_PLANCHEREL.replace("modes = 32", "modes = 0"));
    let out = nhtrace(&["plancherel_suite", "--config", config.to_str().unwrap(), "--no-cache"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.modes"));
}

#[test]
fn unknown_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.toml", &format!("{SMALL_PLANCHEREL}\n[fit]\nwindwo = [1.0, 2.0]\n"));
    let out = nhtrace(&["plancherel_suite", "--config", config.to_str().unwrap(), "--no-cache"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("windwo"));
}

#[test]
fn recipe_and_config_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", SMALL_PLANCHEREL);
    let out = nhtrace(&["weyl_fit", "--config", config.to_str().unwrap(), "--no-cache"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("recipe"));
}

#[test]
fn missing_config_file_exits_two_with_its_path() {
    let out = nhtrace(&["weyl_fit", "--config", "/nonexistent/weyl.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/weyl.toml"));
}

#[test]
fn same_config_and_threads_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", SMALL_PLANCHEREL);
    let run = |name: &str, threads: &str| {
        let out_dir = dir.path().join(name);
        let out = nhtrace(&[
            "plancherel_suite",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
            "--no-cache",
        ]);
        assert!(out.status.success());
        ["plancherel.csv", "coefficients.csv"].map(|f| fs::read(out_dir.join(f)).unwrap())
    };
    let first = run("a", "2");
    assert_eq!(first, run("b", "2"));
    // results are collected in draw order, so the thread count does not matter either
    assert_eq!(first, run("c", "1"));
}

#[test]
fn cached_run_matches_uncached_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", SMALL_PLANCHEREL);
    let cache_dir = dir.path().join("cache");
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = nhtrace(&[
            "plancherel_suite",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--cache-dir",
            cache_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        fs::read(out_dir.join("plancherel.csv")).unwrap()
    };
    let cold = run("cold");
    assert_eq!(fs::read_dir(&cache_dir).unwrap().count(), 1);
    assert_eq!(cold, run("warm"));
}

#[test]
fn verify_without_criteria_exits_two() {
    assert_eq!(nhtrace(&["verify", "--no-cache"]).status.code(), Some(2));
}
