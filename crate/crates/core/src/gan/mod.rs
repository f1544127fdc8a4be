//! The generator/discriminator pair, its losses, and the alternating
//! minimax training loop with per-epoch generator snapshots.

mod loss;
mod model;
mod train;

pub use loss::{d_loss, d_loss_logit_grads, g_loss, g_loss_logit_grads, GLossVariant, SCORE_EPS};
pub use model::{discriminator_score, generate, generate_from, GanArchitecture, GanModel};
pub use train::{train_gan, Snapshot, SnapshotStore, TrainConfig, TrainOutcome};
