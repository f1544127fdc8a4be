//! Config-driven experiments: train every method for every repetition,
//! evaluate against the held-out test set and write CSV/JSON reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ganlab_core::ensemble::{ensemble_generate, train_cascade, train_self_ensemble, EnsembleModel};
use ganlab_core::eval::{comparison_matrix, dhat_curve, ComparisonMatrix, DistanceMatrix};
use ganlab_core::gan::{generate, train_gan, GanModel, TrainConfig};
use ganlab_core::seed::{derive, label_hash};
use ganlab_core::synth::{block_normalize, sample_mixture, subsample, train_test_split, Split};
use ganlab_core::{Error, PointSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{save_ensemble, save_gan, FORMAT_VERSION};
use crate::config::{Distribution, ExperimentConfig, MethodSpec, BASELINE_LABEL};
use crate::error::{IoContext, LabError, Result};
use crate::io::{read_points, write_distances, write_json};
use crate::par::{par_knn_distances, par_train_standard_ensemble};
use crate::summary::{report_summary, write_summary_reports};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    /// Overrides the config's output directory.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub label: String,
    pub kind: String,
    pub attempts: Vec<Attempt>,
    pub completed: bool,
    /// Model checkpoint, or the ensemble manifest for ensembles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    /// Every file the checkpoint consists of, including ensemble members.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoint_files: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<PathBuf>,
    pub train_seconds: f64,
    pub generate_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub index: usize,
    pub seed: u64,
    pub baseline_distances: PathBuf,
    pub dhat: PathBuf,
    pub comparison: PathBuf,
    pub methods: Vec<MethodRecord>,
    pub evaluation_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub format_version: u32,
    pub config_hash: String,
    pub master_seed: u64,
    /// All paths are relative to the directory holding the manifest.
    pub config: PathBuf,
    pub data_seed: u64,
    pub split_seed: u64,
    pub repetitions: Vec<RepetitionRecord>,
    pub reports: Vec<PathBuf>,
    pub total_seconds: f64,
}

impl RunManifest {
    /// Primary checkpoint of every completed method run.
    pub fn checkpoints(&self) -> Vec<&Path> {
        self.method_records().filter_map(|m| m.checkpoint.as_deref()).collect()
    }

    /// Distance matrices of the methods (the baseline's are listed per repetition).
    pub fn distance_matrices(&self) -> Vec<&Path> {
        self.method_records().filter_map(|m| m.distances.as_deref()).collect()
    }

    pub fn failed_runs(&self) -> Vec<(usize, &str)> {
        self.repetitions
            .iter()
            .flat_map(|r| {
                r.methods
                    .iter()
                    .filter(|m| !m.completed)
                    .map(move |m| (r.index, m.label.as_str()))
            })
            .collect()
    }

    /// Every file the run wrote, apart from the manifest itself.
    pub fn files(&self) -> Vec<&Path> {
        let mut out: Vec<&Path> = vec![&self.config];
        for r in &self.repetitions {
            out.extend([r.baseline_distances.as_path(), &r.dhat, &r.comparison]);
            for m in &r.methods {
                out.extend(m.checkpoint_files.iter().map(PathBuf::as_path));
                out.extend(m.distances.as_deref());
            }
        }
        out.extend(self.reports.iter().map(PathBuf::as_path));
        out
    }

    fn method_records(&self) -> impl Iterator<Item = &MethodRecord> {
        self.repetitions.iter().flat_map(|r| &r.methods)
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }
}

enum Trained {
    Gan(GanModel),
    Ensemble(EnsembleModel),
}

struct MethodOutcome {
    record: MethodRecord,
    model: Option<Trained>,
    generated: Option<PointSet>,
}

fn kind_name(spec: &MethodSpec) -> &'static str {
    match spec {
        MethodSpec::Gan { .. } => "gan",
        MethodSpec::Egan { .. } => "egan",
        MethodSpec::Segan { .. } => "segan",
        MethodSpec::Cgan { .. } => "cgan",
    }
}

fn train_method(spec: &MethodSpec, train: &PointSet, base: &TrainConfig, seed: u64) -> ganlab_core::Result<Trained> {
    let cfg = TrainConfig {
        seed,
        snapshot_window: spec.window(base.epochs),
        ..base.clone()
    };
    Ok(match spec {
        MethodSpec::Gan { .. } => Trained::Gan(train_gan(train, &cfg)?.model),
        MethodSpec::Egan { m, .. } => {
            let seeds: Vec<u64> = (0..*m as u64).map(|i| derive(seed, &[i])).collect();
            Trained::Ensemble(par_train_standard_ensemble(train, &cfg, &seeds)?)
        }
        MethodSpec::Segan { m, .. } => Trained::Ensemble(train_self_ensemble(train, *m, &cfg)?),
        MethodSpec::Cgan { r, stages, .. } => Trained::Ensemble(train_cascade(train, *stages, *r, &cfg)?.ensemble),
    })
}

fn sample(spec: &MethodSpec, model: &Trained, n: usize, seed: u64) -> ganlab_core::Result<PointSet> {
    match (model, spec) {
        (Trained::Gan(m), _) => generate(m, n, seed),
        (
            Trained::Ensemble(e),
            MethodSpec::Egan { sampling, .. } | MethodSpec::Segan { sampling, .. } | MethodSpec::Cgan { sampling, .. },
        ) => ensemble_generate(e, n, *sampling, seed),
        (Trained::Ensemble(_), MethodSpec::Gan { .. }) => unreachable!("single GANs train to a GanModel"),
    }
}

/// Trains with one retry on divergence, then generates.
fn run_method(spec: &MethodSpec, train: &PointSet, cfg: &ExperimentConfig, rep_seed: u64) -> MethodOutcome {
    let label = spec.label();
    let key = spec.seed_key().unwrap_or_else(|| label_hash(&label));
    let mut record = MethodRecord {
        label: label.clone(),
        kind: kind_name(spec).into(),
        attempts: Vec::new(),
        completed: false,
        checkpoint: None,
        checkpoint_files: Vec::new(),
        distances: None,
        train_seconds: 0.0,
        generate_seconds: 0.0,
    };
    for attempt in 0..2u64 {
        let seed = derive(rep_seed, &[key, attempt]);
        let t0 = Instant::now();
        let trained = train_method(spec, train, &cfg.train, seed);
        record.train_seconds += t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let result = trained.and_then(|m| {
            let points = sample(spec, &m, cfg.n_generated, derive(seed, &[label_hash("generate")]))?;
            Ok((m, points))
        });
        record.generate_seconds += t1.elapsed().as_secs_f64();
        match result {
            Ok((model, points)) => {
                record.attempts.push(Attempt { seed, error: None });
                record.completed = true;
                return MethodOutcome {
                    record,
                    model: Some(model),
                    generated: Some(points),
                };
            }
            Err(e) => {
                log::warn!("{label}: attempt {attempt} failed: {e}");
                let retry = matches!(e, Error::Diverged { .. });
                record.attempts.push(Attempt {
                    seed,
                    error: Some(e.to_string()),
                });
                if !retry {
                    break;
                }
            }
        }
    }
    MethodOutcome {
        record,
        model: None,
        generated: None,
    }
}

fn file_slug(index: usize, label: &str) -> String {
    let body: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("m{index:02}_{}", body.trim_matches('_'))
}

fn load_data(cfg: &ExperimentConfig, data_seed: u64, split_seed: u64) -> Result<Split> {
    let data = match &cfg.distribution {
        Distribution::Points { path } => read_points(path)?,
        _ => sample_mixture(&cfg.mixture()?.expect("synthetic"), cfg.n_points, data_seed)?,
    };
    let split = train_test_split(&data, &cfg.split.with_seed(split_seed))?;
    let nb = cfg.n_baseline.unwrap_or(cfg.n_generated);
    if nb > split.train.len() {
        return Err(LabError::Validation(vec![format!(
            "n_baseline ({nb}) exceeds the train split ({} points)",
            split.train.len()
        )]));
    }
    Ok(split)
}

pub fn write_dhat_csv(path: &Path, curves: &[(String, Vec<f64>)]) -> Result<()> {
    let mut text = String::from("method,j,dhat\n");
    for (label, curve) in curves {
        for (j, v) in curve.iter().enumerate() {
            text.push_str(&format!("{},{},{}\n", csv_field(label), j + 1, v));
        }
    }
    fs::write(path, text).at(path)
}

pub fn write_comparison_csv(path: &Path, m: &ComparisonMatrix) -> Result<()> {
    let mut text = String::from("method");
    for l in &m.labels {
        text.push(',');
        text.push_str(&csv_field(l));
    }
    text.push('\n');
    for (l, row) in m.labels.iter().zip(&m.codes) {
        text.push_str(&csv_field(l));
        for c in row {
            text.push_str(&format!(",{c}"));
        }
        text.push('\n');
    }
    fs::write(path, text).at(path)
}

/// Quotes labels that contain CSV metacharacters.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn comparison_for(matrices: &[&DistanceMatrix], alpha: f64) -> ganlab_core::Result<ComparisonMatrix> {
    if matrices.len() >= 2 {
        return comparison_matrix(matrices, alpha);
    }
    Ok(ComparisonMatrix {
        labels: matrices.iter().map(|m| m.label().to_string()).collect(),
        codes: vec![vec![0; matrices.len()]; matrices.len()],
        tallies: None,
    })
}

fn relative(base: &Path, p: &Path) -> PathBuf {
    p.strip_prefix(base)
        .map(Path::to_path_buf)
        .unwrap_or_else(|_| p.to_path_buf())
}

/// `--out-dir`, else the config's `output_dir`, else `runs/<config hash prefix>`.
pub fn output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}", &cfg.hash()[..12])))
}

/// Runs every repetition and writes all reports plus `manifest.json` under
/// the output directory. Training failures are recorded, not fatal; check
/// [`RunManifest::failed_runs`].
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    cfg.validate()?;
    let out = output_dir(cfg, opts);
    fs::create_dir_all(&out).at(&out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Validation(vec![format!("jobs: {e}")]))?;
    pool.install(|| run_in(cfg, &out))
}

fn run_in(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let master = cfg.master_seed;
    let data_seed = derive(master, &[label_hash("data")]);
    let split_seed = derive(master, &[label_hash("split")]);
    let split = load_data(cfg, data_seed, split_seed)?;
    let n_baseline = cfg.n_baseline.unwrap_or(cfg.n_generated);

    let config_path = out.join("config.json");
    write_json(&config_path, cfg)?;

    let mut repetitions = Vec::with_capacity(cfg.repetitions);
    for rep in 0..cfg.repetitions {
        let rep_seed = derive(master, &[label_hash("repetition"), rep as u64]);
        let rep_dir = out.join(format!("rep{rep:02}"));
        fs::create_dir_all(rep_dir.join("distances")).at(&rep_dir)?;
        log::info!("repetition {rep}: training {} methods", cfg.methods.len());

        let mut outcomes: Vec<MethodOutcome> = cfg
            .methods
            .par_iter()
            .map(|spec| run_method(spec, &split.train, cfg, rep_seed))
            .collect();

        let t_eval = Instant::now();
        let baseline = subsample(
            &split.train,
            n_baseline,
            derive(rep_seed, &[label_hash(BASELINE_LABEL)]),
        )?;
        let mut targets = vec![split.test.clone(), baseline];
        let done: Vec<usize> = (0..outcomes.len())
            .filter(|&i| outcomes[i].generated.is_some())
            .collect();
        targets.extend(done.iter().map(|&i| outcomes[i].generated.take().expect("completed")));
        let normalized = block_normalize(&split.train, &targets)?;
        let test = &normalized.targets[0];

        let baseline_dm = par_knn_distances(test, &normalized.targets[1], cfg.k)?.with_label(BASELINE_LABEL);
        let baseline_path = rep_dir.join("distances").join(format!("{BASELINE_LABEL}.csv"));
        write_distances(&baseline_path, &baseline_dm)?;

        let mut method_dms = Vec::with_capacity(done.len());
        for (slot, &i) in done.iter().enumerate() {
            let label = outcomes[i].record.label.clone();
            let dm = par_knn_distances(test, &normalized.targets[2 + slot], cfg.k)?.with_label(label);
            let path = rep_dir
                .join("distances")
                .join(format!("{}.csv", file_slug(i, dm.label())));
            write_distances(&path, &dm)?;
            outcomes[i].record.distances = Some(relative(out, &path));
            method_dms.push(dm);
        }

        let mut curves = vec![(BASELINE_LABEL.to_string(), dhat_curve(&baseline_dm, &baseline_dm)?)];
        for dm in &method_dms {
            curves.push((dm.label().to_string(), dhat_curve(dm, &baseline_dm)?));
        }
        let dhat_path = rep_dir.join("dhat.csv");
        write_dhat_csv(&dhat_path, &curves)?;

        let mut compared: Vec<&DistanceMatrix> = Vec::new();
        if cfg.compare_baseline {
            compared.push(&baseline_dm);
        }
        compared.extend(method_dms.iter());
        let comparison = comparison_for(&compared, cfg.alpha)?;
        let comparison_path = rep_dir.join("comparison.csv");
        write_comparison_csv(&comparison_path, &comparison)?;
        let evaluation_seconds = t_eval.elapsed().as_secs_f64();

        if cfg.save_checkpoints {
            let ck_dir = rep_dir.join("checkpoints");
            fs::create_dir_all(&ck_dir).at(&ck_dir)?;
            for (i, o) in outcomes.iter_mut().enumerate() {
                let Some(model) = &o.model else { continue };
                let path = ck_dir.join(format!("{}.json", file_slug(i, &o.record.label)));
                let mut files = vec![relative(out, &path)];
                match model {
                    Trained::Gan(m) => save_gan(m, &path)?,
                    Trained::Ensemble(e) => {
                        let manifest = save_ensemble(e, &path)?;
                        files.extend(manifest.members.iter().map(|f| relative(out, &ck_dir.join(f))));
                    }
                }
                o.record.checkpoint = Some(relative(out, &path));
                o.record.checkpoint_files = files;
            }
        }

        repetitions.push(RepetitionRecord {
            index: rep,
            seed: rep_seed,
            baseline_distances: relative(out, &baseline_path),
            dhat: relative(out, &dhat_path),
            comparison: relative(out, &comparison_path),
            methods: outcomes.into_iter().map(|o| o.record).collect(),
            evaluation_seconds,
        });
    }

    let mut manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        format_version: FORMAT_VERSION,
        config_hash: cfg.hash(),
        master_seed: master,
        config: relative(out, &config_path),
        data_seed,
        split_seed,
        repetitions,
        reports: Vec::new(),
        total_seconds: 0.0,
    };
    let summary = report_summary(&manifest, out)?;
    manifest.reports = write_summary_reports(&summary, out)?;
    manifest.total_seconds = started.elapsed().as_secs_f64();
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
