//! Nearest-neighbor evaluation of generators against a held-out test set:
//! k-NN distance matrices, the relative increase in mean j-th neighbor
//! distance over a train-set baseline, the Wilcoxon signed-rank test, and
//! pairwise comparison matrices.

mod compare;
mod knn;
mod wilcoxon;

pub use compare::{comparison_matrix, ComparisonMatrix, Tally};
pub use knn::{dhat, dhat_curve, knn_distances, knn_row, DistanceMatrix};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult, EXACT_LIMIT};
