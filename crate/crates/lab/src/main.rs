use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ganlab::config::ExperimentConfig;
use ganlab::io::{read_points, write_distances};
use ganlab::par::par_knn_distances;
use ganlab::runner::{output_dir, run_experiment, RunManifest, RunOptions};
use ganlab::summary::report_summary;
use ganlab::{LabError, Result};
use ganlab_core::eval::{dhat_curve, wilcoxon_signed_rank};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "ganlab",
    version,
    about = "Train GAN ensembles on synthetic data and compare them by nearest-neighbor distances"
)]
struct Cli {
    /// Master seed, overriding the config's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config's.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run { config: PathBuf },
    /// Nearest-neighbor distances from test points to generated points.
    Eval {
        generated: PathBuf,
        test: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Train-set sample to compute d̂ and a Wilcoxon comparison against.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Aggregate the reports of a finished run, including timing totals.
    Summarize { manifest: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                cfg.master_seed = seed;
            }
            let opts = RunOptions {
                jobs: cli.jobs,
                out_dir: cli.out_dir,
            };
            let manifest = run_experiment(&cfg, &opts)?;
            let failed = manifest.failed_runs();
            let out = output_dir(&cfg, &opts);
            println!("{}", out.join("manifest.json").display());
            if !failed.is_empty() {
                for (rep, label) in &failed {
                    eprintln!("repetition {rep}: {label} failed");
                }
                return Err(LabError::PartialRun {
                    failed: failed.len(),
                    manifest: out.join("manifest.json"),
                });
            }
            Ok(())
        }
        Command::Eval {
            generated,
            test,
            k,
            alpha,
            baseline,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(LabError::Validation(vec!["--alpha must lie in (0, 1)".into()]));
            }
            if k == 0 {
                return Err(LabError::Validation(vec!["--k must be at least 1".into()]));
            }
            let queries = read_points(&test)?;
            let gen = read_points(&generated)?;
            let dm = par_knn_distances(&queries, &gen, k)?.with_label("generated");
            let means = (1..=k).map(|j| dm.mean(j)).collect::<ganlab_core::Result<Vec<_>>>()?;
            let mut report = json!({ "n_queries": dm.n_queries(), "k": k, "mean_distance": means });
            if let Some(dir) = &cli.out_dir {
                std::fs::create_dir_all(dir).map_err(|source| LabError::Io {
                    path: dir.clone(),
                    source,
                })?;
                write_distances(&dir.join("generated.csv"), &dm)?;
            }
            if let Some(path) = baseline {
                let base = par_knn_distances(&queries, &read_points(&path)?, k)?.with_label("baseline");
                let w = wilcoxon_signed_rank(&base.column(1)?, &dm.column(1)?, alpha)?;
                report["dhat"] = json!(dhat_curve(&dm, &base)?);
                report["baseline_vs_generated"] = json!(w);
                if let Some(dir) = &cli.out_dir {
                    write_distances(&dir.join("baseline.csv"), &base)?;
                }
            }
            println!("{}", serde_json::to_string_pretty(&report).expect("plain values"));
            Ok(())
        }
        Command::Summarize { manifest } => {
            let m = RunManifest::load(&manifest)?;
            let dir = manifest.parent().unwrap_or(std::path::Path::new("."));
            let summary = report_summary(&m, dir)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("plain values"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
