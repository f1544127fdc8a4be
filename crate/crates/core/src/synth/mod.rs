//! Synthetic ground-truth data: Gaussian mixtures, seeded train/test splits,
//! and per-block distance normalization of feature vectors.

mod mixture;
mod normalize;
mod pointset;
mod split;

pub use mixture::{sample_mixture, Component, Covariance, MixtureSpec};
pub use normalize::{block_normalize, mean_pairwise_distance, BlockNormalizer, Normalized};
pub use pointset::{Block, PointSet};
pub use split::{subsample, train_test_split, Split, SplitSpec};
