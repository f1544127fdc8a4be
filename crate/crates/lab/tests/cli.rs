use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ganlab::io::write_points;
use ganlab_core::synth::{sample_mixture, MixtureSpec};

fn ganlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ganlab"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

const CONFIG: &str = r#"{
    "distribution": "imbalanced_bimodal",
    "n_points": 400,
    "split": { "train_fraction": 0.5, "test_fraction": 0.25 },
    "train": { "epochs": 8, "batch_size": 32,
               "architecture": { "generator_hidden": [6], "discriminator_hidden": [6] } },
    "methods": [{ "kind": "gan" }, { "kind": "segan", "m": 2 }],
    "n_generated": 100, "k": 2, "repetitions": 1
}"#;

#[test]
fn run_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.json"), CONFIG).unwrap();
    let out = ganlab(
        &["run", "exp.json", "--out-dir", "out", "--seed", "7", "--jobs", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "out/manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 7);

    let out = ganlab(&["summarize", "out/manifest.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["timings"]["total_seconds"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["comparison"]["labels"].as_array().unwrap().len(), 3);
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.json"),
        CONFIG.replace("\"k\": 2", "\"k\": 2, \"kay\": 3"),
    )
    .unwrap();
    let out = ganlab(&["run", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kay"));

    fs::write(dir.path().join("bad2.json"), CONFIG.replace("\"m\": 2", "\"m\": 1")).unwrap();
    assert_eq!(ganlab(&["run", "bad2.json"], dir.path()).status.code(), Some(1));
    assert_eq!(ganlab(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(ganlab(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let wild = CONFIG.replace(
        "\"epochs\": 8,",
        "\"epochs\": 8, \"adam\": { \"learning_rate\": 1e300 },",
    );
    fs::write(dir.path().join("wild.json"), wild).unwrap();
    let out = ganlab(&["run", "wild.json", "--out-dir", "out"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(
        dir.path().join("out/manifest.json").exists(),
        "partial manifest is written"
    );
    assert_eq!(
        ganlab(&["summarize", "missing.json"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn eval_reports_distances_and_dhat() {
    let dir = tempfile::tempdir().unwrap();
    let spec = MixtureSpec::ring8();
    write_points(&dir.path().join("test.csv"), &sample_mixture(&spec, 50, 1).unwrap()).unwrap();
    write_points(
        &dir.path().join("gen.csv"),
        &sample_mixture(&MixtureSpec::imbalanced_bimodal(), 80, 2).unwrap(),
    )
    .unwrap();
    write_points(&dir.path().join("train.csv"), &sample_mixture(&spec, 80, 3).unwrap()).unwrap();
    let out = ganlab(
        &[
            "eval",
            "gen.csv",
            "test.csv",
            "--k",
            "3",
            "--baseline",
            "train.csv",
            "--out-dir",
            "d",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["mean_distance"].as_array().unwrap().len(), 3);
    assert!(report["dhat"][0].as_f64().unwrap() > 0.0);
    assert_eq!(report["baseline_vs_generated"]["code"], 1);
    assert!(dir.path().join("d/generated.csv").exists());
    assert_eq!(
        ganlab(&["eval", "gen.csv", "test.csv", "--k", "0"], dir.path())
            .status
            .code(),
        Some(1)
    );
}
