//! Experiment configuration: a JSON file with unknown keys rejected.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ganlab_core::ensemble::SamplingPolicy;
use ganlab_core::gan::TrainConfig;
use ganlab_core::synth::{MixtureSpec, SplitSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{IoContext, LabError, Result};
use crate::io::parse_json;

/// Label reserved for the train-set-as-generator baseline.
pub const BASELINE_LABEL: &str = "pdata";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    /// 8 modes on a circle of radius 6, sigma 0.3.
    Ring8,
    /// Weights 0.9 / 0.1 at (5, 0) / (-5, 0), sigma 1.
    ImbalancedBimodal,
    Ring {
        modes: usize,
        radius: f64,
        sigma: f64,
    },
    Mixture(MixtureSpec),
    /// Externally produced feature vectors in the point-set CSV format.
    Points {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            test_fraction: 0.2,
        }
    }
}

impl SplitConfig {
    pub fn with_seed(self, seed: u64) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            test_fraction: self.test_fraction,
            seed,
        }
    }
}

fn two() -> usize {
    2
}

fn stage_shares_policy() -> SamplingPolicy {
    SamplingPolicy::StageShares
}

/// One method to train and evaluate. `seed` replaces the label as the key
/// from which the method's seeds are derived, so two methods can share seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Gan {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Egan {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        m: usize,
        #[serde(default)]
        sampling: SamplingPolicy,
    },
    Segan {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        m: usize,
        /// Inclusive snapshot epochs; defaults to the last quarter of training.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<(usize, usize)>,
        #[serde(default)]
        sampling: SamplingPolicy,
    },
    Cgan {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        r: f64,
        #[serde(default = "two")]
        stages: usize,
        #[serde(default = "stage_shares_policy")]
        sampling: SamplingPolicy,
    },
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Gan { label, .. } => label.clone().unwrap_or_else(|| "gan".into()),
            MethodSpec::Egan { label, m, .. } => label.clone().unwrap_or_else(|| format!("egan({m})")),
            MethodSpec::Segan { label, m, .. } => label.clone().unwrap_or_else(|| format!("segan({m})")),
            MethodSpec::Cgan { label, r, stages, .. } => label.clone().unwrap_or_else(|| {
                if *stages == 2 {
                    format!("cgan({r})")
                } else {
                    format!("cgan({r},K={stages})")
                }
            }),
        }
    }

    pub fn seed_key(&self) -> Option<u64> {
        match self {
            MethodSpec::Gan { seed, .. }
            | MethodSpec::Egan { seed, .. }
            | MethodSpec::Segan { seed, .. }
            | MethodSpec::Cgan { seed, .. } => *seed,
        }
    }

    /// Snapshot window a self-ensemble uses under `epochs` total epochs.
    pub fn window(&self, epochs: usize) -> Option<(usize, usize)> {
        match self {
            MethodSpec::Segan { window, .. } => Some(window.unwrap_or((epochs - epochs / 4, epochs))),
            _ => None,
        }
    }
}

/// Leaves a 10,000-point train split, matching the default baseline size.
fn default_n_points() -> usize {
    12_500
}
fn default_n_generated() -> usize {
    10_000
}
fn default_k() -> usize {
    10
}
fn default_repetitions() -> usize {
    10
}
fn default_alpha() -> f64 {
    0.05
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: Distribution,
    /// Points sampled from a synthetic distribution before splitting.
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default)]
    pub split: SplitConfig,
    /// Shared schedule; `seed` and `snapshot_window` are set per method.
    #[serde(default)]
    pub train: TrainConfig,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_n_generated")]
    pub n_generated: usize,
    /// Size of the train-set baseline; defaults to `n_generated` so both
    /// sides of d̂ use equally many points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_baseline: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Whether the baseline takes part in the pairwise comparisons.
    #[serde(default = "yes")]
    pub compare_baseline: bool,
    #[serde(default = "yes")]
    pub save_checkpoints: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        parse_json(origin, text).map_err(|e| LabError::Validation(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        Self::from_json(&text, path)
    }

    pub fn labels(&self) -> Vec<String> {
        self.methods.iter().map(MethodSpec::label).collect()
    }

    pub fn mixture(&self) -> Result<Option<MixtureSpec>> {
        Ok(match &self.distribution {
            Distribution::Ring8 => Some(MixtureSpec::ring8()),
            Distribution::ImbalancedBimodal => Some(MixtureSpec::imbalanced_bimodal()),
            Distribution::Ring { modes, radius, sigma } => Some(MixtureSpec::ring(*modes, *radius, *sigma)?),
            Distribution::Mixture(m) => Some(m.clone()),
            Distribution::Points { .. } => None,
        })
    }

    /// Every problem found, not just the first.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        match self.mixture() {
            Ok(Some(m)) => {
                if let Err(e) = m.validate() {
                    errs.push(format!("distribution: {e}"));
                }
            }
            Ok(None) => {}
            Err(e) => errs.push(format!("distribution: {e}")),
        }
        if let Some(sw) = self.train.snapshot_window {
            errs.push(format!(
                "train.snapshot_window {sw:?}: set `window` on segan methods instead"
            ));
        }
        if self.train.seed != 0 {
            errs.push("train.seed: seeds are derived from master_seed".into());
        }
        if let Err(e) = self.train.validate() {
            errs.push(format!("train: {e}"));
        }
        let split = self.split.with_seed(0);
        if matches!(self.distribution, Distribution::Points { .. }) {
            if let Err(e) = split.validate() {
                errs.push(format!("split: {e}"));
            }
        } else {
            match split.sizes(self.n_points) {
                Ok((train, _)) => {
                    let nb = self.n_baseline.unwrap_or(self.n_generated);
                    if nb > train {
                        errs.push(format!("n_baseline ({nb}) exceeds the train split ({train} points)"));
                    }
                    if nb < self.k {
                        errs.push(format!("n_baseline ({nb}) must be at least k ({})", self.k));
                    }
                }
                Err(e) => errs.push(format!("split: {e}")),
            }
        }
        if self.methods.is_empty() {
            errs.push("methods: at least one method is required".into());
        }
        let mut seen = BTreeSet::new();
        for label in self.labels() {
            if label == BASELINE_LABEL {
                errs.push(format!(
                    "methods: label `{BASELINE_LABEL}` is reserved for the data baseline"
                ));
            } else if !seen.insert(label.clone()) {
                errs.push(format!("methods: duplicate label `{label}`"));
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            let at = format!("methods[{i}] ({})", m.label());
            match m {
                MethodSpec::Gan { .. } => {}
                MethodSpec::Egan { m, sampling, .. } => {
                    if *m < 2 {
                        errs.push(format!("{at}: m must be at least 2"));
                    }
                    if *sampling == SamplingPolicy::StageShares {
                        errs.push(format!("{at}: stage_shares sampling applies to cascades only"));
                    }
                }
                MethodSpec::Segan { m: size, sampling, .. } => {
                    let (lo, hi) = m.window(self.train.epochs).expect("segan");
                    if *size < 2 {
                        errs.push(format!("{at}: m must be at least 2"));
                    }
                    if lo > hi || hi > self.train.epochs {
                        errs.push(format!(
                            "{at}: window [{lo}, {hi}] must lie within 0..={} epochs",
                            self.train.epochs
                        ));
                    } else if hi - lo + 1 < *size {
                        errs.push(format!("{at}: window [{lo}, {hi}] holds fewer than {size} snapshots"));
                    }
                    if *sampling == SamplingPolicy::StageShares {
                        errs.push(format!("{at}: stage_shares sampling applies to cascades only"));
                    }
                }
                MethodSpec::Cgan { r, stages, .. } => {
                    if !(*r > 0.0 && *r < 1.0) {
                        errs.push(format!("{at}: r must lie in (0, 1)"));
                    }
                    if *stages < 2 {
                        errs.push(format!("{at}: stages must be at least 2"));
                    }
                }
            }
        }
        if self.k == 0 {
            errs.push("k must be at least 1".into());
        }
        if self.n_generated < self.k {
            errs.push(format!(
                "n_generated ({}) must be at least k ({})",
                self.n_generated, self.k
            ));
        }
        if self.repetitions == 0 {
            errs.push("repetitions must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            errs.push("alpha must lie in (0, 1)".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(LabError::Validation(errs))
        }
    }

    /// SHA-256 of the canonical JSON form: keys sorted, defaults filled in,
    /// output location excluded (it does not affect results).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        // serde_json's map is ordered by key, which makes this canonical
        let value = serde_json::to_value(&c).expect("config serializes");
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
