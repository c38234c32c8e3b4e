use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use avglab::averaging::TRACE_HEADER;
use avglab::experiment::{execute, ExperimentConfig};

fn avglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avglab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../exp")
        .join(name)
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL_WEYL: &str = r#"
experiment = "weyl-ud"
alpha = ["2", "tau"]
schedule = [10, 100, 500]

[sampling]
count = 6
seed = 3
"#;

#[test]
fn list_names_every_statement() {
    let out = avglab(&["list"]);
    assert!(out.status.success());
    let s = text(&out.stdout);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows
        .iter()
        .any(|r| r.starts_with("sobol-singular") && r.ends_with("Theorem p-Sobol")));
    assert!(rows
        .iter()
        .any(|r| r.starts_with("dio-scan") && r.ends_with("Lemma Dio")));
}

#[test]
fn renyi_parry_summary_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = exp("renyi-parry.toml");
    let out = avglab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("renyi-parry.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["seed"], 42);
    let g = &summary["groups"][0];
    assert!((g["lebesgue_mean"].as_f64().unwrap() - 0.618034).abs() < 1e-6);
    assert!((g["density_integral"].as_f64().unwrap() - 0.723607).abs() < 1e-6);
    let levels: Vec<f64> = g["density_values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((levels[0] - 1.170820).abs() < 1e-6 && (levels[1] - 0.723607).abs() < 1e-6);
}

#[test]
fn unit_multiplier_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_WEYL.replace("\"tau\"", "\"-1\""));
    let out = avglab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(
        err.contains("alpha[1]") && err.contains("|alpha| must exceed 1"),
        "{err}"
    );
}

#[test]
fn schema_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL_WEYL.replace("seed = 3", "seed = 3\nsize = 4"),
    );
    let out = avglab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("sampling"),
        "{}",
        text(&out.stderr)
    );
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL_WEYL}\n[params]\nkmax = \"five\"\n"),
    );
    let out = avglab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("params.kmax"),
        "{}",
        text(&out.stderr)
    );
}

#[test]
fn failed_predicate_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL_WEYL}\n[params]\nstar_max = 1e-9\n");
    let cfg = write_config(dir.path(), &body);
    let out = avglab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["pass"], false);
}

#[test]
fn weyl_ud_runs_are_byte_identical() {
    let cfg = exp("weyl-ud.toml");
    let mut csvs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = avglab(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--seed",
            "7",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        csvs.push((
            std::fs::read(dir.path().join("weyl-ud.csv")).unwrap(),
            std::fs::read(dir.path().join("weyl-ud.json")).unwrap(),
        ));
    }
    assert!(csvs[0] == csvs[1]);
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = ExperimentConfig::parse(SMALL_WEYL).unwrap();
    let one = execute(&cfg, None, Some(1)).unwrap();
    let three = execute(&cfg, None, Some(3)).unwrap();
    assert_eq!(one.trace_csv().unwrap(), three.trace_csv().unwrap());
    assert_eq!(one.summary_json().unwrap(), three.summary_json().unwrap());
    let other = execute(&cfg, Some(4), Some(1)).unwrap();
    assert_ne!(one.trace_csv().unwrap(), other.trace_csv().unwrap());
}

#[test]
fn shipped_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../exp");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::load(&path).unwrap();
            let again = ExperimentConfig::parse(&c.to_toml().unwrap()).unwrap();
            assert_eq!(again, c, "{}", path.display());
            seen += 1;
        }
    }
    assert_eq!(seen, 9);
}

#[test]
fn trace_and_summary_schemas() {
    let cfg = ExperimentConfig::parse(SMALL_WEYL).unwrap();
    let o = execute(&cfg, None, None).unwrap();
    let csv = text(&o.trace_csv().unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), TRACE_HEADER.join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 10);
    assert_eq!(&first[..5], &["weyl-ud", "2", "0", "10", "star"]);
    let v: serde_json::Value = serde_json::from_str(&o.summary_json().unwrap()).unwrap();
    for key in [
        "experiment",
        "statement",
        "seed",
        "samples",
        "schedule",
        "pass",
        "groups",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["groups"].as_array().unwrap().len(), 2);
    assert!(v["groups"][0]["star"]["median"].is_f64());
}

#[test]
fn orbit_dump() {
    let out = avglab(&["orbit", "--alpha", "2", "--x", "1/3", "--n", "3"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "n,frac");
    assert_eq!(lines.len(), 4);
    let (n, v) = lines[2].split_once(',').unwrap();
    assert_eq!(n, "1");
    assert_eq!(v.split('e').next().unwrap().replace('.', "").len(), 18);
    assert!((v.parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn precision_budget_env_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_avglab"))
        .args(["orbit", "--alpha", "3/2", "--x", "1", "--n", "100000"])
        .env("AVGLAB_PRECISION_BUDGET_MB", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("working bits"),
        "{}",
        text(&out.stderr)
    );
}
