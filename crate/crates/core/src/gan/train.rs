use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::loss::{d_loss, d_loss_logit_grads, g_loss, g_loss_logit_grads, GLossVariant};
use super::model::{noise, GanArchitecture, GanModel};
use crate::error::invalid;
use crate::numerics::{
    adam_step, mlp_backward_preactivation, mlp_forward, AdamConfig, Matrix, MlpParams, OptimizerState,
};
use crate::synth::PointSet;
use crate::{seed, Error, Result};

const STREAM_INIT: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

/// Training schedule for one GAN.
///
/// An epoch is one pass over the training set in shuffled mini-batches.
/// Each batch runs `d_steps` discriminator updates followed by one
/// generator update.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub d_steps: usize,
    pub g_loss: GLossVariant,
    /// Inclusive `[lo, hi]` epochs at which generator snapshots are kept.
    pub snapshot_window: Option<(usize, usize)>,
    pub snapshot_discriminator: bool,
    pub adam: AdamConfig,
    pub architecture: GanArchitecture,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 64,
            d_steps: 1,
            g_loss: GLossVariant::NonSaturating,
            snapshot_window: None,
            snapshot_discriminator: false,
            adam: AdamConfig::default(),
            architecture: GanArchitecture::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(invalid("batch_size must be at least 2"));
        }
        if self.d_steps == 0 {
            return Err(invalid("d_steps must be at least 1"));
        }
        if let Some((lo, hi)) = self.snapshot_window {
            if lo > hi || hi > self.epochs {
                return Err(invalid(alloc::format!(
                    "snapshot window [{lo}, {hi}] must satisfy lo <= hi <= epochs ({})",
                    self.epochs
                )));
            }
        }
        self.adam.validate()?;
        self.architecture.validate()
    }
}

/// Parameters captured at the end of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub generator: MlpParams,
    pub discriminator: Option<MlpParams>,
}

/// Epoch index to snapshot, restricted to an inclusive window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotStore {
    window: Option<(usize, usize)>,
    entries: BTreeMap<usize, Snapshot>,
}

impl SnapshotStore {
    pub fn new(window: Option<(usize, usize)>) -> Self {
        Self {
            window,
            entries: BTreeMap::new(),
        }
    }

    pub fn window(&self) -> Option<(usize, usize)> {
        self.window
    }

    pub fn contains_epoch(&self, epoch: usize) -> bool {
        self.window.is_some_and(|(lo, hi)| (lo..=hi).contains(&epoch))
    }

    /// Stores a snapshot if `epoch` lies inside the window; returns whether it did.
    pub fn record(&mut self, epoch: usize, model: &GanModel, with_discriminator: bool) -> bool {
        if !self.contains_epoch(epoch) {
            return false;
        }
        self.entries.insert(
            epoch,
            Snapshot {
                generator: model.generator().clone(),
                discriminator: with_discriminator.then(|| model.discriminator().clone()),
            },
        );
        true
    }

    pub fn get(&self, epoch: usize) -> Option<&Snapshot> {
        self.entries.get(&epoch)
    }

    /// Recorded epochs, ascending.
    pub fn epochs(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Snapshot)> {
        self.entries.iter().map(|(&e, s)| (e, s))
    }
}

/// Result of [`train_gan`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GanModel,
    pub snapshots: SnapshotStore,
    /// Mean discriminator loss per epoch.
    pub d_loss_history: Vec<f64>,
    /// Mean generator loss per epoch.
    pub g_loss_history: Vec<f64>,
}

fn column(v: Vec<f64>) -> Matrix {
    let n = v.len();
    Matrix::new(n, 1, v).expect("column")
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    d_opt: OptimizerState,
    g_opt: OptimizerState,
    noise_rng: seed::Rng,
}

impl Trainer<'_> {
    fn d_step(&mut self, model: &mut GanModel, real: &Matrix) -> Result<core::result::Result<f64, Error>> {
        let z = noise(&mut self.noise_rng, real.rows(), model.noise_dim());
        let (gen, disc) = model.nets_mut();
        let fake = gen.predict(&z)?;
        let real_pass = mlp_forward(disc, real)?;
        let fake_pass = mlp_forward(disc, &fake)?;
        let sr = real_pass.output().as_slice();
        let sf = fake_pass.output().as_slice();
        let loss = d_loss(sr, sf)?;
        let (gr, gf) = d_loss_logit_grads(sr, sf);
        let (mut grads, _) = mlp_backward_preactivation(disc, &real_pass, &column(gr))?;
        let (fake_grads, _) = mlp_backward_preactivation(disc, &fake_pass, &column(gf))?;
        grads.accumulate(&fake_grads);
        Ok(adam_step(disc, &grads, &mut self.d_opt).map(|_| loss))
    }

    fn g_step(&mut self, model: &mut GanModel, n: usize) -> Result<core::result::Result<f64, Error>> {
        let z = noise(&mut self.noise_rng, n, model.noise_dim());
        let (gen, disc) = model.nets_mut();
        let gen_pass = mlp_forward(gen, &z)?;
        let disc_pass = mlp_forward(disc, gen_pass.output())?;
        let sf = disc_pass.output().as_slice();
        let loss = g_loss(sf, self.cfg.g_loss)?;
        let up = column(g_loss_logit_grads(sf, self.cfg.g_loss));
        let (_, d_fake) = mlp_backward_preactivation(disc, &disc_pass, &up)?;
        let (grads, _) = crate::numerics::mlp_backward(gen, &gen_pass, &d_fake)?;
        Ok(adam_step(gen, &grads, &mut self.g_opt).map(|_| loss))
    }
}

/// Trains a freshly initialized GAN (initialized from `cfg.seed`) on `data`.
///
/// Snapshots are recorded at the end of every epoch inside
/// `cfg.snapshot_window` (epoch 0 is the initialization).
pub fn train_gan(data: &PointSet, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    if data.dim() != cfg.architecture.data_dim {
        return Err(Error::Shape {
            context: "training data width",
            expected: cfg.architecture.data_dim,
            found: data.dim(),
        });
    }
    let mut model = GanModel::init(&cfg.architecture, seed::derive(cfg.seed, &[STREAM_INIT]))?;
    model = GanModel::from_parts(model.generator().clone(), model.discriminator().clone(), 0, cfg.seed)?;
    let mut snapshots = SnapshotStore::new(cfg.snapshot_window);
    snapshots.record(0, &model, cfg.snapshot_discriminator);

    let mut trainer = Trainer {
        cfg,
        d_opt: OptimizerState::new(model.discriminator(), cfg.adam),
        g_opt: OptimizerState::new(model.generator(), cfg.adam),
        noise_rng: seed::rng(seed::derive(cfg.seed, &[STREAM_NOISE])),
    };
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut d_hist = Vec::with_capacity(cfg.epochs);
    let mut g_hist = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut seed::rng(seed::derive(cfg.seed, &[STREAM_SHUFFLE, epoch as u64])));
        let (mut d_sum, mut g_sum, mut batches) = (0.0, 0.0, 0usize);
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let real = data.points().select_rows(idx);
            let diverged = |loss| Error::Diverged { epoch, batch, loss };
            for _ in 0..cfg.d_steps {
                let loss = trainer
                    .d_step(&mut model, &real)?
                    .map_err(|_| diverged("discriminator gradient"))?;
                if !loss.is_finite() {
                    return Err(diverged("discriminator loss"));
                }
                d_sum += loss;
            }
            let loss = trainer
                .g_step(&mut model, idx.len())?
                .map_err(|_| diverged("generator gradient"))?;
            if !loss.is_finite() {
                return Err(diverged("generator loss"));
            }
            g_sum += loss;
            batches += 1;
        }
        d_hist.push(d_sum / (batches * cfg.d_steps) as f64);
        g_hist.push(g_sum / batches as f64);
        model.set_epochs_trained(epoch);
        snapshots.record(epoch, &model, cfg.snapshot_discriminator);
    }

    Ok(TrainOutcome {
        model,
        snapshots,
        d_loss_history: d_hist,
        g_loss_history: g_hist,
    })
}
