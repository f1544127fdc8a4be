//! GAN ensembles: independently trained members, snapshots of one training
//! run, and cascades in which each stage is trained on the data the previous
//! stage's discriminator still recognizes as real.

mod cascade;
mod model;
mod sampling;
mod standard;

pub use cascade::{apply_gate, gate_threshold, stage_shares, train_cascade, CascadeOutcome, GateDecision};
pub use model::{EnsembleKind, EnsembleModel, Member, Provenance};
pub use sampling::{ensemble_generate, member_counts, member_seed, SamplingPolicy};
pub use standard::{select_snapshots, standard_member, train_self_ensemble, train_standard_ensemble};
