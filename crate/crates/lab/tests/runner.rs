mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use common::tiny_config;
use ganlab::checkpoint::{load_ensemble, load_gan};
use ganlab::runner::{run_experiment, RunManifest, RunOptions};
use ganlab::summary::{report_summary, Summary};
use ganlab::LabError;

fn run(cfg: &ganlab::config::ExperimentConfig, dir: &Path) -> RunManifest {
    let opts = RunOptions {
        jobs: Some(2),
        out_dir: Some(dir.to_path_buf()),
    };
    run_experiment(cfg, &opts).unwrap()
}

fn read_summary(dir: &Path) -> Summary {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

/// Every file under `dir` except the manifest, keyed by relative path.
fn report_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if !path.ends_with("manifest.json") {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

#[test]
fn single_gan_single_repetition_bookkeeping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(r#"[{ "kind": "gan" }]"#, r#", "repetitions": 1"#);
    let m = run(&cfg, dir.path());
    assert_eq!(m.checkpoints().len(), 1);
    assert_eq!(m.distance_matrices().len(), 1);
    assert!(m.failed_runs().is_empty());
    let model = load_gan(&dir.path().join(m.checkpoints()[0])).unwrap();
    assert_eq!(model.epochs_trained(), 4);
    let on_disk = RunManifest::load(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(on_disk, m);
}

#[test]
fn manifest_lists_exactly_the_files_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(
        r#"[{ "kind": "gan" }, { "kind": "egan", "m": 2 }, { "kind": "cgan", "r": 0.6 }]"#,
        "",
    );
    let m = run(&cfg, dir.path());
    let listed: Vec<String> = m.files().iter().map(|p| p.to_string_lossy().into_owned()).collect();
    for f in &listed {
        assert!(dir.path().join(f).is_file(), "listed but missing: {f}");
    }
    for f in report_files(dir.path()).keys() {
        if !f.ends_with(".blocks.json") {
            assert!(listed.contains(f), "written but not listed: {f}");
        }
    }
    let ens = load_ensemble(
        &dir.path()
            .join(m.repetitions[0].methods[2].checkpoint.as_ref().unwrap()),
    )
    .unwrap();
    assert_eq!(ens.len(), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = tiny_config(
        r#"[{ "kind": "gan" }, { "kind": "cgan", "r": 0.5 }, { "kind": "cgan", "r": 0.9 }]"#,
        r#", "master_seed": 42"#,
    );
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg, a.path());
    let opts = RunOptions {
        jobs: Some(1),
        out_dir: Some(b.path().to_path_buf()),
    };
    run_experiment(&cfg, &opts).unwrap();
    let (fa, fb) = (report_files(a.path()), report_files(b.path()));
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (k, v) in &fa {
        assert!(v == &fb[k], "{k} differs");
    }
}

#[test]
fn table_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(
        r#"[{ "kind": "gan" }, { "kind": "cgan", "r": 0.5 }, { "kind": "cgan", "r": 0.6 }, { "kind": "cgan", "r": 0.7 },
            { "kind": "cgan", "r": 0.8 }, { "kind": "cgan", "r": 0.9 }]"#,
        r#", "repetitions": 1"#,
    );
    run(&cfg, dir.path());
    let s = read_summary(dir.path());
    assert_eq!(
        s.comparison.labels,
        vec![
            "pdata",
            "gan",
            "cgan(0.5)",
            "cgan(0.6)",
            "cgan(0.7)",
            "cgan(0.8)",
            "cgan(0.9)"
        ]
    );
    assert!(s.comparison.is_antisymmetric());
    assert_eq!(s.curves[0].mean, vec![0.0; 3]);
    assert_eq!(s.drops.len(), 5);
    assert!(s.timings.is_none());
}

#[test]
fn single_method_without_baseline_gives_a_zero_one_by_one_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(r#"[{ "kind": "segan", "m": 2 }]"#, r#", "compare_baseline": false"#);
    run(&cfg, dir.path());
    let s = read_summary(dir.path());
    assert_eq!(s.comparison.labels, vec!["segan(2)"]);
    assert_eq!(s.comparison.codes, vec![vec![0]]);
    let curve = s.curves.iter().find(|c| c.label == "segan(2)").unwrap();
    assert_eq!((curve.runs, curve.mean.len()), (2, 3));
}

#[test]
fn identical_methods_tie() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(
        r#"[{ "kind": "gan", "label": "a", "seed": 5 }, { "kind": "gan", "label": "b", "seed": 5 }]"#,
        r#", "repetitions": 3"#,
    );
    run(&cfg, dir.path());
    let s = read_summary(dir.path());
    let t = s.comparison.tallies.as_ref().unwrap();
    assert_eq!((t[1][2].zero, t[1][2].total()), (3, 3));
    assert_eq!(s.curves[1].mean, s.curves[2].mean);
}

#[test]
fn adding_a_method_does_not_move_the_others() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(
        &tiny_config(r#"[{ "kind": "gan" }]"#, r#", "repetitions": 1"#),
        a.path(),
    );
    run(
        &tiny_config(
            r#"[{ "kind": "egan", "m": 2 }, { "kind": "gan" }]"#,
            r#", "repetitions": 1"#,
        ),
        b.path(),
    );
    let ga = fs::read(a.path().join("rep00/checkpoints/m00_gan.json")).unwrap();
    let gb = fs::read(b.path().join("rep00/checkpoints/m01_gan.json")).unwrap();
    assert_eq!(ga, gb);
}

#[test]
fn divergence_is_retried_then_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(
        r#"[{ "kind": "gan" }, { "kind": "gan", "label": "wild" }]"#,
        r#", "repetitions": 1"#,
    );
    cfg.train.adam.learning_rate = 1e300;
    let m = run(&cfg, dir.path());
    let failed = m.failed_runs();
    assert_eq!(failed.len(), 2);
    let rec = &m.repetitions[0].methods[1];
    assert_eq!(rec.attempts.len(), 2);
    assert_ne!(rec.attempts[0].seed, rec.attempts[1].seed);
    assert!(rec
        .attempts
        .iter()
        .all(|a| a.error.as_deref().unwrap().contains("diverged")));
    let s = read_summary(dir.path());
    assert_eq!(s.failures.len(), 2);
    assert_eq!(s.comparison.labels, vec!["pdata"]);
}

#[test]
fn summary_needs_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(
        &tiny_config(r#"[{ "kind": "gan" }]"#, r#", "repetitions": 1"#),
        dir.path(),
    );
    let empty = RunManifest {
        repetitions: Vec::new(),
        ..m.clone()
    };
    assert!(matches!(
        report_summary(&empty, dir.path()),
        Err(LabError::EmptyManifest)
    ));
    let s = report_summary(&m, dir.path()).unwrap();
    let t = s.timings.unwrap();
    assert_eq!(t.methods.len(), 1);
    assert!(t.methods[0].train_seconds > 0.0);
}

#[test]
fn invalid_config_is_refused_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(r#"[{ "kind": "egan", "m": 1 }]"#, "");
    let err = run_experiment(
        &cfg,
        &RunOptions {
            jobs: None,
            out_dir: Some(dir.path().join("out")),
        },
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(!dir.path().join("out").exists());
}
