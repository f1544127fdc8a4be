//! Consolidated results across the repetitions listed in a run manifest.

use std::path::{Path, PathBuf};

use ganlab_core::eval::{ComparisonMatrix, Tally};
use serde::{Deserialize, Serialize};

use crate::config::BASELINE_LABEL;
use crate::error::{IoContext, LabError, Result};
use crate::io::write_json;
use crate::runner::{csv_field, RunManifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub label: String,
    /// Repetitions that produced this curve.
    pub runs: usize,
    /// Mean and median d̂ at j = 1..=k.
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
}

/// Relative d̂ reduction at j = 1 from a single GAN to an ensemble, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhatDrop {
    pub from: String,
    pub to: String,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub repetition: usize,
    pub label: String,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub label: String,
    pub train_seconds: f64,
    pub generate_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingTotals {
    pub total_seconds: f64,
    pub evaluation_seconds: f64,
    pub methods: Vec<MethodTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub repetitions: usize,
    pub curves: Vec<CurveSummary>,
    /// Codes are the sign of `plus - minus` in each cell's tally.
    pub comparison: ComparisonMatrix,
    pub drops: Vec<DhatDrop>,
    pub failures: Vec<Failure>,
    /// Wall-clock totals; omitted from the written report so reruns are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingTotals>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).at(path)?;
    Ok(csv::Reader::from_reader(file))
}

fn read_dhat(path: &Path) -> Result<Vec<(String, usize, f64)>> {
    let mut out = Vec::new();
    for (line, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| LabError::corrupt(path, format!("row {line}"), e))?;
        let field = |i: usize| {
            rec.get(i)
                .ok_or_else(|| LabError::corrupt(path, format!("row {line}"), "too few fields"))
        };
        let j = field(1)?
            .parse()
            .map_err(|e| LabError::corrupt(path, format!("row {line}, j"), e))?;
        let v = field(2)?
            .parse()
            .map_err(|e| LabError::corrupt(path, format!("row {line}, dhat"), e))?;
        out.push((field(0)?.to_string(), j, v));
    }
    Ok(out)
}

fn read_comparison(path: &Path) -> Result<(Vec<String>, Vec<Vec<i8>>)> {
    let mut r = reader(path)?;
    let labels: Vec<String> = r
        .headers()
        .map_err(|e| LabError::corrupt(path, "header", e))?
        .iter()
        .skip(1)
        .map(String::from)
        .collect();
    let mut codes = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| LabError::corrupt(path, format!("row {line}"), e))?;
        let row = rec
            .iter()
            .skip(1)
            .map(|c| {
                c.parse::<i8>()
                    .map_err(|e| LabError::corrupt(path, format!("row {line}"), e))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != labels.len() {
            return Err(LabError::corrupt(
                path,
                format!("row {line}"),
                "row width differs from header",
            ));
        }
        codes.push(row);
    }
    if codes.len() != labels.len() {
        return Err(LabError::corrupt(path, "rows", "matrix is not square"));
    }
    Ok((labels, codes))
}

/// Reads every repetition's d̂ and comparison reports (paths relative to
/// `run_dir`) and aggregates them.
pub fn report_summary(manifest: &RunManifest, run_dir: &Path) -> Result<Summary> {
    let first = manifest.repetitions.first().ok_or(LabError::EmptyManifest)?;
    let mut labels = vec![BASELINE_LABEL.to_string()];
    labels.extend(first.methods.iter().map(|m| m.label.clone()));

    // per label, per j: values over repetitions
    let mut values: Vec<Vec<Vec<f64>>> = vec![Vec::new(); labels.len()];
    let mut tallies = vec![vec![Tally::default(); labels.len()]; labels.len()];
    let mut compared = vec![false; labels.len()];
    for rep in &manifest.repetitions {
        for (label, j, v) in read_dhat(&run_dir.join(&rep.dhat))? {
            let li = labels
                .iter()
                .position(|l| *l == label)
                .ok_or_else(|| LabError::corrupt(&rep.dhat, "method", format!("unknown label `{label}`")))?;
            if j == 0 {
                return Err(LabError::corrupt(&rep.dhat, "j", "neighbor ranks start at 1"));
            }
            if values[li].len() < j {
                values[li].resize(j, Vec::new());
            }
            values[li][j - 1].push(v);
        }
        let (rl, codes) = read_comparison(&run_dir.join(&rep.comparison))?;
        let idx = rl
            .iter()
            .map(|l| {
                labels
                    .iter()
                    .position(|g| g == l)
                    .ok_or_else(|| LabError::corrupt(&rep.comparison, "labels", format!("unknown label `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        for (a, row) in codes.iter().enumerate() {
            compared[idx[a]] = true;
            for (b, &c) in row.iter().enumerate() {
                tallies[idx[a]][idx[b]].add(c);
            }
        }
    }

    let curves: Vec<CurveSummary> = labels
        .iter()
        .zip(&values)
        .filter(|(_, v)| !v.is_empty())
        .map(|(label, per_j)| CurveSummary {
            label: label.clone(),
            runs: per_j[0].len(),
            mean: per_j.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect(),
            median: per_j.iter().map(|v| median(v)).collect(),
        })
        .collect();

    let keep: Vec<usize> = (0..labels.len()).filter(|&i| compared[i]).collect();
    let tallies: Vec<Vec<Tally>> = keep
        .iter()
        .map(|&a| keep.iter().map(|&b| tallies[a][b]).collect())
        .collect();
    let comparison = ComparisonMatrix {
        labels: keep.iter().map(|&i| labels[i].clone()).collect(),
        codes: tallies
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| (i64::from(t.plus) - i64::from(t.minus)).signum() as i8)
                    .collect()
            })
            .collect(),
        tallies: Some(tallies),
    };

    let mean_at_1 = |label: &str| curves.iter().find(|c| c.label == label).map(|c| c.mean[0]);
    let mut drops = Vec::new();
    if let Some(single) = first.methods.iter().find(|m| m.kind == "gan") {
        if let Some(base) = mean_at_1(&single.label).filter(|b| *b != 0.0) {
            for m in first.methods.iter().filter(|m| m.kind != "gan") {
                if let Some(v) = mean_at_1(&m.label) {
                    drops.push(DhatDrop {
                        from: single.label.clone(),
                        to: m.label.clone(),
                        percent: 100.0 * (base - v) / base,
                    });
                }
            }
        }
    }

    let failures = manifest
        .repetitions
        .iter()
        .flat_map(|r| {
            r.methods.iter().filter(|m| !m.completed).map(move |m| Failure {
                repetition: r.index,
                label: m.label.clone(),
                errors: m.attempts.iter().filter_map(|a| a.error.clone()).collect(),
            })
        })
        .collect();

    let methods = first
        .methods
        .iter()
        .map(|m| {
            let runs = manifest
                .repetitions
                .iter()
                .flat_map(|r| r.methods.iter().filter(|x| x.label == m.label));
            let (t, g) = runs.fold((0.0, 0.0), |(t, g), x| (t + x.train_seconds, g + x.generate_seconds));
            MethodTiming {
                label: m.label.clone(),
                train_seconds: t,
                generate_seconds: g,
            }
        })
        .collect();

    Ok(Summary {
        config_hash: manifest.config_hash.clone(),
        seeds: manifest.repetitions.iter().map(|r| r.seed).collect(),
        repetitions: manifest.repetitions.len(),
        curves,
        comparison,
        drops,
        failures,
        timings: Some(TimingTotals {
            total_seconds: manifest.total_seconds,
            evaluation_seconds: manifest.repetitions.iter().map(|r| r.evaluation_seconds).sum(),
            methods,
        }),
    })
}

/// Writes `summary.json` (without timings), `tallies.csv` and
/// `dhat_summary.csv`; returns their paths relative to `out`.
pub fn write_summary_reports(summary: &Summary, out: &Path) -> Result<Vec<PathBuf>> {
    let report = Summary {
        timings: None,
        ..summary.clone()
    };
    write_json(&out.join("summary.json"), &report)?;

    let c = &summary.comparison;
    let mut text = String::from("method");
    for l in &c.labels {
        text.push(',');
        text.push_str(&csv_field(l));
    }
    text.push('\n');
    let tallies = c.tallies.as_ref().expect("summaries carry tallies");
    for (l, row) in c.labels.iter().zip(tallies) {
        text.push_str(&csv_field(l));
        for t in row {
            text.push_str(&format!(",{}/{}/{}", t.plus, t.zero, t.minus));
        }
        text.push('\n');
    }
    let tallies_path = out.join("tallies.csv");
    std::fs::write(&tallies_path, text).at(&tallies_path)?;

    let mut text = String::from("method,j,mean,median,runs\n");
    for curve in &summary.curves {
        for (j, (m, md)) in curve.mean.iter().zip(&curve.median).enumerate() {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&curve.label),
                j + 1,
                m,
                md,
                curve.runs
            ));
        }
    }
    let dhat_path = out.join("dhat_summary.csv");
    std::fs::write(&dhat_path, text).at(&dhat_path)?;

    Ok(vec![
        "summary.json".into(),
        "tallies.csv".into(),
        "dhat_summary.csv".into(),
    ])
}
