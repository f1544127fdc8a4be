//! Dense-network numerics: row-major matrices, forward and reverse passes
//! through a stack of dense layers, and an Adam optimizer.
//!
//! Everything is `f64`. Batches are matrices with one sample per row.

mod adam;
mod matrix;
mod mlp;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use matrix::Matrix;
pub use mlp::{
    mlp_backward, mlp_backward_preactivation, mlp_forward, Activation, Dense, ForwardCache, GradientSet, LayerGrad,
    MlpParams,
};
