//! End-to-end runs of the `diracgap` binary on small configurations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
[grid]
L = 10.0
n = 1000
[sweep]
h_list = [2, 4, 8]
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_diracgap"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_passes_on_defaults_and_writes_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = run(
        tmp.path(),
        "",
        &["validate", "--out", out.to_str().unwrap(), "--seed", "7"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["kind"], "validate");
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["validate"]["n"], 400);
    assert!(manifest["tolerances"]["RESOLVENT_TOL"].is_number());
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    for f in ["validate.csv", "summary.json", "manifest.json"] {
        assert!(files.contains(&f), "{files:?}");
        assert!(out.join(f).exists());
    }
}

#[test]
fn constant_profile_sweep_matches_homogenized_operator() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = format!("{SMALL}\n[potential]\nZ = 0.4\ng = 0.1\nepsilon_reg = 0.5\nv2 = {{ mean = 1.0 }}\n");
    let o = run(tmp.path(), &config, &["sweep", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    let mut rdr = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let col = rdr.headers().unwrap().iter().position(|h| h == "abs_err").unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let err: f64 = rec.unwrap()[col].parse().unwrap();
        assert!(err <= 1e-10, "{err}");
        rows += 1;
    }
    assert!(rows >= 3);
}

#[test]
fn non_increasing_h_list_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let config = SMALL.replace("h_list = [2, 4, 8]", "h_list = [2, 8, 4]");
    let o = run(
        tmp.path(),
        &config,
        &["sweep", "--out", tmp.path().join("o").to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.h_list"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), "[grid]\nLength = 3.0\n", &["spectrum"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Length"));
}

#[test]
fn failing_property_is_named_with_exit_one() {
    let tmp = TempDir::new().unwrap();
    // Too coarse to resolve the bound state to the oracle tolerance.
    let config = "[counterexample]\nh_list = [10, 20]\nl_big = 60\npoints_per_unit = 100\n";
    let out = tmp.path().join("out");
    let o = run(tmp.path(), config, &["counterexample", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle_match"));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["failing"], serde_json::json!(["oracle_match"]));
    assert!(out.join("counterexample.csv").exists());
}

#[test]
fn repeated_runs_produce_identical_tables() {
    let tmp = TempDir::new().unwrap();
    let mut tables = Vec::new();
    for (i, threads) in ["1", "3"].into_iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let o = run(
            tmp.path(),
            SMALL,
            &["sweep", "--out", out.to_str().unwrap(), "--threads", threads],
        );
        assert!(o.status.code().is_some());
        tables.push([
            fs::read_to_string(out.join("sweep.csv")).unwrap(),
            fs::read_to_string(out.join("srs.csv")).unwrap(),
        ]);
    }
    assert_eq!(tables[0], tables[1]);
}
