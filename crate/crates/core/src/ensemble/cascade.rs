use alloc::vec::Vec;

use super::{EnsembleKind, EnsembleModel, Member, Provenance};
use crate::error::invalid;
use crate::gan::{discriminator_score, train_gan, GanModel, TrainConfig};
use crate::synth::PointSet;
use crate::{seed, Result};

const STREAM_STAGE: u64 = 0xca5c;

/// One gate evaluation: the point is redirected iff `score > threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDecision {
    pub score: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Threshold `t_r` such that the fraction of scores strictly above it is as
/// close to `r` as possible without exceeding it.
///
/// With distinct scores exactly `floor(r * N)` scores pass. Ties at the
/// threshold are rejected, so ties only ever admit fewer points.
pub fn gate_threshold(scores: &[f64], r: f64) -> f64 {
    assert!(!scores.is_empty(), "gate_threshold needs at least one score");
    assert!((0.0..=1.0).contains(&r), "gate ratio must lie in [0, 1]");
    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let pass = ((r * n as f64) as usize).min(n);
    if pass == n {
        sorted[0].next_down()
    } else {
        sorted[n - pass - 1]
    }
}

/// Scores `data` with the model's discriminator and keeps the points with
/// `D(x) > threshold`, in their original order.
pub fn apply_gate(model: &GanModel, data: &PointSet, threshold: f64) -> Result<(PointSet, Vec<GateDecision>)> {
    if threshold.is_nan() {
        return Err(invalid("gate threshold must not be NaN"));
    }
    let scores = discriminator_score(model, data)?;
    let decisions: Vec<GateDecision> = scores
        .iter()
        .map(|&score| GateDecision {
            score,
            threshold,
            passed: score > threshold,
        })
        .collect();
    let keep: Vec<usize> = decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| d.passed)
        .map(|(i, _)| i)
        .collect();
    Ok((data.select(&keep), decisions))
}

/// Sampling share of each of `stages` cascade stages for gate ratio `r`:
/// `(1 - r) r^(k-1)` for every stage but the last, `r^(K-1)` for the last.
pub fn stage_shares(r: f64, stages: usize) -> Vec<f64> {
    (0..stages)
        .map(|k| {
            let reach = libm::pow(r, k as f64);
            if k + 1 == stages {
                reach
            } else {
                (1.0 - r) * reach
            }
        })
        .collect()
}

/// Result of [`train_cascade`].
#[derive(Debug, Clone)]
pub struct CascadeOutcome {
    pub ensemble: EnsembleModel,
    /// Training-set size of every stage that was trained.
    pub stage_sizes: Vec<usize>,
    /// Set when the cascade stopped before `stages` because the redirected
    /// subset fell below `2 * batch_size`; holds the number of stages trained.
    pub truncated_at: Option<usize>,
}

/// Trains a cascade of up to `stages` GANs.
///
/// Stage 1 sees all of `data` and uses `cfg.seed`; every later stage trains
/// on the points its predecessor's final discriminator scores above the
/// `r`-quantile threshold of that predecessor's own training set.
pub fn train_cascade(data: &PointSet, stages: usize, r: f64, cfg: &TrainConfig) -> Result<CascadeOutcome> {
    if stages < 2 {
        return Err(invalid("a cascade needs at least two stages"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("cascade gate ratio must lie in (0, 1)"));
    }
    let min_size = 2 * cfg.batch_size;
    let mut subset = data.clone();
    let mut members = Vec::with_capacity(stages);
    let mut thresholds = Vec::with_capacity(stages - 1);
    let mut sizes = Vec::with_capacity(stages);
    let mut truncated_at = None;
    for stage in 0..stages {
        let stage_seed = if stage == 0 {
            cfg.seed
        } else {
            seed::derive(cfg.seed, &[STREAM_STAGE, stage as u64])
        };
        let stage_cfg = TrainConfig {
            seed: stage_seed,
            snapshot_window: None,
            ..cfg.clone()
        };
        let model = train_gan(&subset, &stage_cfg)?.model;
        sizes.push(subset.len());
        members.push(Member {
            generator: model.generator().clone(),
            provenance: Provenance {
                init_seed: stage_seed,
                epoch: model.epochs_trained(),
                stage: Some(stage),
            },
        });
        if stage + 1 == stages {
            break;
        }
        let scores = discriminator_score(&model, &subset)?;
        let t = gate_threshold(&scores, r);
        let (passed, _) = apply_gate(&model, &subset, t)?;
        if passed.len() < min_size {
            log::warn!(
                "cascade truncated after stage {}: {} redirected points < {}",
                stage + 1,
                passed.len(),
                min_size
            );
            truncated_at = Some(stage + 1);
            break;
        }
        thresholds.push(t);
        subset = passed;
    }
    let shares = stage_shares(r, members.len());
    let ensemble = EnsembleModel::new(EnsembleKind::Cascade, members, Some(shares), Some(thresholds))?;
    Ok(CascadeOutcome {
        ensemble,
        stage_sizes: sizes,
        truncated_at,
    })
}
