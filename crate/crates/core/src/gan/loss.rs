use alloc::vec::Vec;

use crate::{Error, Result};

/// Scores are clamped to `[SCORE_EPS, 1 - SCORE_EPS]` before taking logs.
pub const SCORE_EPS: f64 = 1e-7;

/// Generator objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GLossVariant {
    /// `E[log(1 - D(G(z)))]`, minimized directly.
    Minimax,
    /// `-E[log D(G(z))]`.
    #[default]
    NonSaturating,
}

#[inline]
fn clamp(s: f64) -> f64 {
    s.clamp(SCORE_EPS, 1.0 - SCORE_EPS)
}

fn mean_of(scores: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    scores.iter().map(|&s| f(clamp(s))).sum::<f64>() / scores.len() as f64
}

/// Discriminator loss `-(E[log D(x)] + E[log(1 - D(G(z)))])`.
pub fn d_loss(scores_real: &[f64], scores_fake: &[f64]) -> Result<f64> {
    if scores_real.is_empty() || scores_fake.is_empty() {
        return Err(Error::Empty("discriminator scores"));
    }
    let real = mean_of(scores_real, libm::log);
    let fake = mean_of(scores_fake, |s| libm::log(1.0 - s));
    Ok(-(real + fake))
}

pub fn g_loss(scores_fake: &[f64], variant: GLossVariant) -> Result<f64> {
    if scores_fake.is_empty() {
        return Err(Error::Empty("discriminator scores"));
    }
    Ok(match variant {
        GLossVariant::Minimax => mean_of(scores_fake, |s| libm::log(1.0 - s)),
        GLossVariant::NonSaturating => -mean_of(scores_fake, libm::log),
    })
}

/// Gradients of [`d_loss`] with respect to the discriminator logits of the
/// real and fake batches (exact away from the clamp).
pub fn d_loss_logit_grads(scores_real: &[f64], scores_fake: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nr = scores_real.len() as f64;
    let nf = scores_fake.len() as f64;
    (
        scores_real.iter().map(|&s| -(1.0 - s) / nr).collect(),
        scores_fake.iter().map(|&s| s / nf).collect(),
    )
}

/// Gradient of [`g_loss`] with respect to the discriminator logits of the fake batch.
pub fn g_loss_logit_grads(scores_fake: &[f64], variant: GLossVariant) -> Vec<f64> {
    let n = scores_fake.len() as f64;
    match variant {
        GLossVariant::Minimax => scores_fake.iter().map(|&s| -s / n).collect(),
        GLossVariant::NonSaturating => scores_fake.iter().map(|&s| -(1.0 - s) / n).collect(),
    }
}
