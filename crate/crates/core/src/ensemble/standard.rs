use alloc::vec::Vec;

use rand::seq::index;

use super::{EnsembleKind, EnsembleModel, Member, Provenance};
use crate::error::invalid;
use crate::gan::{train_gan, TrainConfig, TrainOutcome};
use crate::synth::PointSet;
use crate::{seed, Error, Result};

const STREAM_SELECT: u64 = 0x5e1f;

/// Trains one member from scratch with `seed` replacing `cfg.seed`.
pub fn standard_member(data: &PointSet, cfg: &TrainConfig, seed: u64) -> Result<Member> {
    let cfg = TrainConfig {
        seed,
        snapshot_window: None,
        ..cfg.clone()
    };
    let out = train_gan(data, &cfg)?;
    Ok(Member {
        provenance: Provenance {
            init_seed: seed,
            epoch: out.model.epochs_trained(),
            stage: None,
        },
        generator: out.model.generator().clone(),
    })
}

fn check_seeds(m: usize, seeds: &[u64]) -> Result<()> {
    if m < 2 {
        return Err(invalid("an ensemble needs at least two members"));
    }
    if seeds.len() != m {
        return Err(Error::Shape {
            context: "ensemble seeds",
            expected: m,
            found: seeds.len(),
        });
    }
    for (i, s) in seeds.iter().enumerate() {
        if seeds[..i].contains(s) {
            return Err(Error::DuplicateSeed(*s));
        }
    }
    Ok(())
}

/// `m` GANs trained independently on all of `data`, one per seed.
///
/// Members are trained one after another; callers wanting parallelism can
/// train [`standard_member`]s themselves and assemble them with
/// [`EnsembleModel::new`].
pub fn train_standard_ensemble(data: &PointSet, m: usize, cfg: &TrainConfig, seeds: &[u64]) -> Result<EnsembleModel> {
    check_seeds(m, seeds)?;
    let members = seeds
        .iter()
        .map(|&s| standard_member(data, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    EnsembleModel::new(EnsembleKind::Standard, members, None, None)
}

fn window_of(cfg: &TrainConfig, m: usize) -> Result<(usize, usize)> {
    let window = cfg
        .snapshot_window
        .ok_or_else(|| invalid("self-ensembles need a snapshot window"))?;
    if window.1 + 1 - window.0 < m {
        return Err(Error::WindowTooNarrow { window, requested: m });
    }
    Ok(window)
}

/// Picks `m` recorded snapshots uniformly without replacement (seeded) and
/// returns them as a self-ensemble ordered by epoch.
pub fn select_snapshots(outcome: &TrainOutcome, m: usize, selection_seed: u64) -> Result<EnsembleModel> {
    if m == 0 {
        return Err(invalid("a self-ensemble needs at least one member"));
    }
    let epochs = outcome.snapshots.epochs();
    if epochs.len() < m {
        return Err(Error::WindowTooNarrow {
            window: outcome.snapshots.window().unwrap_or((0, 0)),
            requested: m,
        });
    }
    let mut picked: Vec<usize> = index::sample(&mut seed::rng(selection_seed), epochs.len(), m)
        .into_iter()
        .map(|i| epochs[i])
        .collect();
    picked.sort_unstable();
    let init_seed = outcome.model.init_seed();
    let members = picked
        .into_iter()
        .map(|epoch| Member {
            generator: outcome.snapshots.get(epoch).expect("recorded").generator.clone(),
            provenance: Provenance {
                init_seed,
                epoch,
                stage: None,
            },
        })
        .collect();
    EnsembleModel::new(EnsembleKind::SelfEnsemble, members, None, None)
}

/// One training run; `m` members drawn from the snapshots inside
/// `cfg.snapshot_window`.
pub fn train_self_ensemble(data: &PointSet, m: usize, cfg: &TrainConfig) -> Result<EnsembleModel> {
    window_of(cfg, m)?;
    let outcome = train_gan(data, cfg)?;
    select_snapshots(&outcome, m, seed::derive(cfg.seed, &[STREAM_SELECT]))
}
