//! Thread-parallel versions of the embarrassingly parallel core operations.
//! Results are identical to the sequential ones regardless of scheduling.

use ganlab_core::ensemble::{standard_member, EnsembleKind, EnsembleModel};
use ganlab_core::eval::{knn_row, DistanceMatrix};
use ganlab_core::gan::TrainConfig;
use ganlab_core::{Error, PointSet, Result};
use rayon::prelude::*;

/// [`ganlab_core::eval::knn_distances`], parallel over queries.
pub fn par_knn_distances(queries: &PointSet, generated: &PointSet, k: usize) -> Result<DistanceMatrix> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if k > generated.len() {
        return Err(Error::KTooLarge {
            k,
            available: generated.len(),
        });
    }
    if queries.dim() != generated.dim() {
        return Err(Error::Shape {
            context: "query vs generated feature width",
            expected: queries.dim(),
            found: generated.dim(),
        });
    }
    let rows: Vec<Vec<f64>> = (0..queries.len())
        .into_par_iter()
        .map_init(Vec::new, |scratch, i| knn_row(queries.row(i), generated, k, scratch))
        .collect();
    DistanceMatrix::new("", queries.len(), k, rows.concat())
}

/// [`ganlab_core::ensemble::train_standard_ensemble`] with members trained concurrently.
pub fn par_train_standard_ensemble(data: &PointSet, cfg: &TrainConfig, seeds: &[u64]) -> Result<EnsembleModel> {
    if seeds.len() < 2 {
        return Err(Error::Invalid("a standard ensemble needs at least two members".into()));
    }
    let members = seeds
        .par_iter()
        .map(|&s| standard_member(data, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    EnsembleModel::new(EnsembleKind::Standard, members, None, None)
}
